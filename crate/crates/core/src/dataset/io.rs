//! Line-delimited JSON feature files.
//!
//! Line 1 carries `{"manifest": {...}}`; every following non-blank line is one
//! record. Unknown fields are rejected at every level.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consistency::EntitySet;
use crate::dataset::record::{Dataset, FeatureManifest, Label, Modality, ModalityFeatures, SmcRecord};
use crate::error::{Error, Result};
use crate::numeric::DenseVector;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestLine {
    manifest: FeatureManifest,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntities {
    #[serde(default)]
    text: Vec<Vec<f64>>,
    #[serde(default)]
    image: Vec<Vec<f64>>,
    #[serde(default)]
    audio: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    label: u64,
    text_emb: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_frames: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_emb: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio_chunks: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio_emb: Option<Vec<f64>>,
    #[serde(default)]
    entities: RawEntities,
}

fn to_vec<T: Scalar>(v: &[f64]) -> DenseVector<T> {
    DenseVector::from_f64(v)
}

fn to_f64<T: Scalar>(v: &DenseVector<T>) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn features<T: Scalar>(
    id: &str,
    modality: Modality,
    seq: Option<Vec<Vec<f64>>>,
    pooled: Option<Vec<f64>>,
) -> Result<ModalityFeatures<T>> {
    match (seq, pooled) {
        (Some(s), None) => Ok(ModalityFeatures::Sequence(s.iter().map(|v| to_vec(v)).collect())),
        (None, Some(p)) => Ok(ModalityFeatures::Pooled(to_vec(&p))),
        (Some(_), Some(_)) => Err(Error::InvalidRecord {
            id: id.to_owned(),
            message: format!("{modality} given both as a sequence and pre-pooled"),
        }),
        (None, None) => Err(Error::InvalidRecord {
            id: id.to_owned(),
            message: format!("missing {modality} features"),
        }),
    }
}

impl RawRecord {
    fn into_record<T: Scalar>(self) -> Result<SmcRecord<T>> {
        let label = Label::from_index(self.label).ok_or(Error::Label(self.label as f64))?;
        let entity_set = |m: Modality, vs: &[Vec<f64>]| EntitySet::new(m, vs.iter().map(|v| to_vec(v)).collect());
        Ok(SmcRecord {
            image: features(&self.id, Modality::Image, self.image_frames, self.image_emb)?,
            audio: features(&self.id, Modality::Audio, self.audio_chunks, self.audio_emb)?,
            entities_text: entity_set(Modality::Text, &self.entities.text),
            entities_image: entity_set(Modality::Image, &self.entities.image),
            entities_audio: entity_set(Modality::Audio, &self.entities.audio),
            text_emb: to_vec(&self.text_emb),
            label,
            id: self.id,
        })
    }

    fn from_record<T: Scalar>(r: &SmcRecord<T>) -> Self {
        let split = |f: &ModalityFeatures<T>| match f {
            ModalityFeatures::Sequence(s) => (Some(s.iter().map(to_f64).collect()), None),
            ModalityFeatures::Pooled(p) => (None, Some(to_f64(p))),
        };
        let (image_frames, image_emb) = split(&r.image);
        let (audio_chunks, audio_emb) = split(&r.audio);
        let ents = |m: Modality| r.entities(m).vectors().iter().map(to_f64).collect();
        RawRecord {
            id: r.id.clone(),
            label: r.label.index() as u64,
            text_emb: to_f64(&r.text_emb),
            image_frames,
            image_emb,
            audio_chunks,
            audio_emb,
            entities: RawEntities {
                text: ents(Modality::Text),
                image: ents(Modality::Image),
                audio: ents(Modality::Audio),
            },
        }
    }
}

/// Parses and validates a feature stream.
pub fn read_dataset<T: Scalar, R: BufRead>(input: R) -> Result<Dataset<T>> {
    let mut manifest: Option<FeatureManifest> = None;
    let mut records = Vec::new();
    let mut ids = std::collections::HashSet::new();

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: line_no,
            message: e.to_string(),
        };
        match &manifest {
            None => {
                let head: ManifestLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("expected manifest header: {e}"),
                })?;
                head.manifest.validate().map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                manifest = Some(head.manifest);
            }
            Some(m) => {
                let raw: RawRecord = serde_json::from_str(&line).map_err(parse_err)?;
                let record = raw.into_record::<T>()?;
                record.validate(m)?;
                if !ids.insert(record.id.clone()) {
                    return Err(Error::InvalidRecord {
                        id: record.id,
                        message: format!("duplicate id on line {line_no}"),
                    });
                }
                records.push(record);
            }
        }
    }

    let manifest = manifest.ok_or(Error::Parse {
        line: 1,
        message: "missing manifest header".into(),
    })?;
    Dataset::new(manifest, records)
}

pub fn write_dataset<T: Scalar, W: Write>(dataset: &Dataset<T>, mut out: W) -> Result<()> {
    let io = |e| Error::io("<feature stream>", e);
    serde_json::to_writer(
        &mut out,
        &ManifestLine {
            manifest: *dataset.manifest(),
        },
    )?;
    out.write_all(b"\n").map_err(io)?;
    for r in dataset.records() {
        serde_json::to_writer(&mut out, &RawRecord::from_record(r))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}

pub fn save_dataset<T: Scalar>(dataset: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MANIFEST: &str = r#"{"manifest":{"d_T":2,"d_I":3,"d_A":1,"d_E":2,"schema_version":1}}"#;

    fn parse(body: &str) -> Result<Dataset<f64>> {
        read_dataset(format!("{MANIFEST}\n{body}").as_bytes())
    }

    #[test]
    fn empty_record_list_is_valid() {
        let d = parse("").unwrap();
        assert!(d.is_empty());
        assert_eq!(d.manifest().d_image, 3);
    }

    #[test]
    fn pooling_happens_on_access() {
        let d = parse(
            r#"{"id":"a","label":1,"text_emb":[1,2],"image_frames":[[0,0,0],[2,4,6]],"audio_emb":[0.5],"entities":{"text":[[1,0]]}}"#,
        )
        .unwrap();
        let [t, i, a] = d.records()[0].pooled().unwrap();
        assert_eq!(&*t, &[1.0, 2.0]);
        assert_eq!(&*i, &[1.0, 2.0, 3.0]);
        assert_eq!(&*a, &[0.5]);
        assert!(d.records()[0].entities_image.is_empty());
    }

    #[test]
    fn off_by_one_text_dim_is_rejected() {
        let err = parse(r#"{"id":"a","label":0,"text_emb":[1],"image_emb":[0,0,0],"audio_emb":[0]}"#).unwrap_err();
        match err {
            Error::DimMismatch { id, field, expected, actual } => {
                assert_eq!((id.as_str(), field.as_str(), expected, actual), ("a", "text_emb", 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_rejections() {
        let cases = [
            // unknown field
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_emb":[0,0,0],"audio_emb":[0],"extra":1}"#,
            // missing audio
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_emb":[0,0,0]}"#,
            // zero-length frame list
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_frames":[],"audio_emb":[0]}"#,
            // frames/chunks out of sync
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_frames":[[0,0,0],[0,0,0],[0,0,0]],"audio_chunks":[[0]]}"#,
            // bad label
            r#"{"id":"a","label":2,"text_emb":[1,1],"image_emb":[0,0,0],"audio_emb":[0]}"#,
            // entity dim
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_emb":[0,0,0],"audio_emb":[0],"entities":{"audio":[[1]]}}"#,
            // both representations
            r#"{"id":"a","label":0,"text_emb":[1,1],"image_emb":[0,0,0],"image_frames":[[0,0,0]],"audio_emb":[0]}"#,
        ];
        for c in cases {
            assert!(parse(c).is_err(), "accepted: {c}");
        }
        let dup = r#"{"id":"a","label":0,"text_emb":[1,1],"image_emb":[0,0,0],"audio_emb":[0]}"#;
        assert!(parse(&format!("{dup}\n{dup}")).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse("\n{not json") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_dataset::<f64, _>(r#"{"id":"a"}"#.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn synchronized_within_one() {
        let ok = r#"{"id":"a","label":0,"text_emb":[1,1],"image_frames":[[0,0,0],[0,0,0]],"audio_chunks":[[0]]}"#;
        assert!(parse(ok).is_ok());
    }
}

//! Self-describing JSON checkpoints. Values are written as shortest
//! round-trip decimals and parsed back exactly, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, ParamId};
use crate::numcore::Tensor;
use crate::scalar::Scalar;

pub const FORMAT: &str = "tbsa-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub precision: String,
    pub model_config: ModelConfig,
    /// Training settings that produced the weights, if any.
    #[serde(default)]
    pub train_config: Option<serde_json::Value>,
    pub vocabulary: Vec<String>,
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn from_model<T: Scalar>(model: &Model<T>, train_config: Option<serde_json::Value>) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            precision: T::NAME.to_string(),
            model_config: model.config.clone(),
            train_config,
            vocabulary: model.vocabulary.tokens().to_vec(),
            tensors: ParamId::ALL
                .iter()
                .zip(&model.params)
                .map(|(id, t)| NamedTensor {
                    name: id.name().to_string(),
                    shape: t.shape().to_vec(),
                    data: t.data().iter().map(|x| x.as_f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn into_model<T: Scalar>(self) -> Result<Model<T>> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.precision != T::NAME {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds {} values, requested {}",
                self.precision,
                T::NAME
            )));
        }
        self.model_config.validate()?;
        let mut params: Vec<Option<Tensor<T>>> = vec![None; ParamId::ALL.len()];
        for nt in self.tensors {
            let id = ParamId::from_name(&nt.name)
                .ok_or_else(|| Error::Checkpoint(format!("unknown tensor `{}`", nt.name)))?;
            let data = nt.data.into_iter().map(T::lit).collect();
            params[id.index()] = Some(Tensor::new(nt.shape, data)?);
        }
        let params = params
            .into_iter()
            .zip(ParamId::ALL)
            .map(|(p, id)| p.ok_or_else(|| Error::Checkpoint(format!("missing tensor `{}`", id.name()))))
            .collect::<Result<Vec<_>>>()?;
        let vocabulary = Vocabulary::from_tokens(self.vocabulary.into_iter().skip(1));
        if params[ParamId::Embedding.index()].rows() != vocabulary.len() {
            return Err(Error::Checkpoint("embedding rows do not match vocabulary".into()));
        }
        Ok(Model {
            config: self.model_config,
            vocabulary,
            params,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save<T: Scalar>(
    model: &Model<T>,
    train_config: Option<serde_json::Value>,
    path: &Path,
) -> Result<()> {
    fs::write(path, Checkpoint::from_model(model, train_config).to_json()?)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_json(&fs::read_to_string(path)?)
}

pub fn load<T: Scalar>(path: &Path) -> Result<Model<T>> {
    read(path)?.into_model()
}

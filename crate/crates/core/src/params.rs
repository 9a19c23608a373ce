//! Growing-dimension parameter vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcmcError};

/// An ordered list of named real blocks. Growth is append-only: new blocks
/// go at the end and existing blocks are never reordered.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterVector {
    blocks: Vec<(String, Vec<f64>)>,
}

impl ParameterVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a new block. Fails if the name is already taken.
    pub fn push_block(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if self.blocks.iter().any(|(n, _)| *n == name) {
            return Err(SmcmcError::Contract(format!("duplicate block name `{name}`")));
        }
        self.blocks.push((name, values));
        Ok(())
    }

    /// Builder form of [`push_block`](Self::push_block).
    pub fn with_block(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_block(name, values)?;
        Ok(self)
    }

    /// Build from a fixed list of blocks.
    ///
    /// # Panics
    /// If two blocks share a name.
    pub fn from_blocks<N: Into<String>>(blocks: impl IntoIterator<Item = (N, Vec<f64>)>) -> Self {
        let mut out = Self::new();
        for (name, values) in blocks {
            out.push_block(name, values)
                .expect("block names must be distinct");
        }
        out
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn get(&self, name: &str, index: usize) -> Option<f64> {
        self.block(name).and_then(|b| b.get(index).copied())
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.blocks.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn block_names(&self) -> Vec<&str> {
        self.blocks.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Total dimension: the sum of block lengths.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|(_, v)| v.len()).sum()
    }

    /// Flatten in block order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    /// True when `self` agrees bitwise with every value of `earlier`, block by
    /// block, where blocks of `self` may be longer than those of `earlier` and
    /// `self` may carry extra blocks. This is the locality contract a jumping
    /// kernel must honor.
    pub fn extends(&self, earlier: &ParameterVector) -> bool {
        earlier.blocks.iter().all(|(name, old)| match self.block(name) {
            Some(new) => {
                new.len() >= old.len() && new.iter().zip(old).all(|(a, b)| a.to_bits() == b.to_bits())
            }
            None => false,
        })
    }

    /// Same block names and lengths, in the same order.
    pub fn same_structure(&self, other: &ParameterVector) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|((a, va), (b, vb))| a == b && va.len() == vb.len())
    }
}

/// The sampled state of one chain.
///
/// Models keep their own typed state for speed; this trait is how the engine
/// reads diagnostic components and checks structural invariants.
pub trait ChainState: Clone + Send + Sync {
    /// Current total dimension d_t.
    fn dim(&self) -> usize;

    /// Value of component `index` of block `block`, if present.
    fn component(&self, block: &str, index: usize) -> Option<f64>;

    /// Named-block view of the state.
    fn to_params(&self) -> ParameterVector;
}

impl ChainState for ParameterVector {
    fn dim(&self) -> usize {
        ParameterVector::dim(self)
    }

    fn component(&self, block: &str, index: usize) -> Option<f64> {
        self.get(block, index)
    }

    fn to_params(&self) -> ParameterVector {
        self.clone()
    }
}

//! XOR exponential-family benchmark over M bits:
//!
//! ```text
//! p(s) = exp(A(s)) / Z,
//! A(s) = ε₀ Σ_i a_i s_i + ε₁ Σ_{i<j} b_ij (s_i ⊕ s_j)
//!      + ε₂ Σ_{i<j<k} c_ijk (s_i ⊕ s_j ⊕ s_k),
//! ```
//!
//! with coefficients drawn i.i.d. from Uniform(−1, 1). Pair and triple
//! coefficients are stored flat in lexicographic index order. A subset of the
//! bits is designated the target; [`split_target`] reshapes the table so those
//! bits form a single joint target variable `Y` and the rest become binary
//! features `X1, X2, ..`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{Alphabet, DiscreteJointDistribution, LogBase, VariableId};
use crate::error::{Error, Result};

/// Exact enumeration cap: tables have `2^M` states.
pub const MAX_MODEL_BITS: usize = 20;

/// Which interaction coefficients survive after drawing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskPolicy {
    /// Keep every coefficient.
    None,
    /// Zero every pair/triple coefficient whose index set does not contain
    /// exactly one target bit.
    ExactlyOneTarget,
}

/// Coefficients and target split of the benchmark model.
#[derive(Debug, Clone, PartialEq)]
pub struct XorModelSpec {
    m: usize,
    eps: [f64; 3],
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    target_vars: Vec<usize>,
    coefficient_seed: u64,
    mask: MaskPolicy,
}

fn default_targets(m: usize) -> Vec<usize> {
    // The last three bits, when there is room for them plus a feature.
    if m >= 4 {
        vec![m - 3, m - 2, m - 1]
    } else {
        vec![m - 1]
    }
}

fn binomial2(m: usize) -> usize {
    m * (m - 1) / 2
}

fn binomial3(m: usize) -> usize {
    m * (m - 1) * (m - 2) / 6
}

/// Draws a model: coefficients i.i.d. Uniform(−1, 1) from the seed, default
/// target bits, then the mask applied.
pub fn generate_spec(
    m: usize,
    eps0: f64,
    eps1: f64,
    eps2: f64,
    seed: u64,
    mask: MaskPolicy,
) -> Result<XorModelSpec> {
    generate_spec_with_targets(m, eps0, eps1, eps2, seed, mask, default_targets(m))
}

/// Same as [`generate_spec`] with an explicit target bit set.
pub fn generate_spec_with_targets(
    m: usize,
    eps0: f64,
    eps1: f64,
    eps2: f64,
    seed: u64,
    mask: MaskPolicy,
    target_vars: Vec<usize>,
) -> Result<XorModelSpec> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "the model needs at least 2 bits, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
    };
    // Fixed draw order: a, then b, then c, each lexicographic. The mask is
    // applied afterwards so the same seed draws the same coefficients
    // regardless of policy.
    let a = draw(m);
    let b = draw(binomial2(m));
    let c = draw(binomial3(m));
    XorModelSpec::from_parts(m, [eps0, eps1, eps2], a, b, c, target_vars, seed, mask)
}

impl XorModelSpec {
    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        m: usize,
        eps: [f64; 3],
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        mut target_vars: Vec<usize>,
        coefficient_seed: u64,
        mask: MaskPolicy,
    ) -> Result<Self> {
        if a.len() != m || b.len() != binomial2(m) || c.len() != binomial3(m) {
            return Err(Error::InvalidArgument(format!(
                "coefficient counts ({}, {}, {}) do not match M = {m}",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        target_vars.sort_unstable();
        target_vars.dedup();
        if target_vars.is_empty()
            || target_vars.len() >= m
            || *target_vars.last().unwrap() >= m
        {
            return Err(Error::InvalidArgument(format!(
                "target bits {target_vars:?} must be a proper non-empty subset of 0..{m}"
            )));
        }
        let mut spec = XorModelSpec {
            m,
            eps,
            a,
            b,
            c,
            target_vars,
            coefficient_seed,
            mask,
        };
        spec.apply_mask();
        Ok(spec)
    }

    /// Idempotently zeroes the coefficients excluded by the mask policy.
    fn apply_mask(&mut self) {
        if self.mask != MaskPolicy::ExactlyOneTarget {
            return;
        }
        let is_target = |i: usize| self.target_vars.contains(&i);
        let mut idx = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                let hits = is_target(i) as usize + is_target(j) as usize;
                if hits != 1 {
                    self.b[idx] = 0.0;
                }
                idx += 1;
            }
        }
        let mut idx = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                for k in j + 1..self.m {
                    let hits =
                        is_target(i) as usize + is_target(j) as usize + is_target(k) as usize;
                    if hits != 1 {
                        self.c[idx] = 0.0;
                    }
                    idx += 1;
                }
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> [f64; 3] {
        self.eps
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn target_vars(&self) -> &[usize] {
        &self.target_vars
    }

    pub fn feature_vars(&self) -> Vec<usize> {
        (0..self.m)
            .filter(|i| !self.target_vars.contains(i))
            .collect()
    }

    pub fn coefficient_seed(&self) -> u64 {
        self.coefficient_seed
    }

    pub fn mask(&self) -> MaskPolicy {
        self.mask
    }

    /// Flat position of `b_ij` for `i < j`.
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.m);
        i * (2 * self.m - i - 1) / 2 + (j - i - 1)
    }

    /// `A(s)` for one bit assignment.
    pub fn log_weight(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.m);
        let mut linear = 0.0;
        for (ai, &s) in self.a.iter().zip(bits) {
            linear += ai * s as f64;
        }
        let mut pair = 0.0;
        let mut idx = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                pair += self.b[idx] * (bits[i] ^ bits[j]) as f64;
                idx += 1;
            }
        }
        let mut triple = 0.0;
        let mut idx = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                for k in j + 1..self.m {
                    triple += self.c[idx] * (bits[i] ^ bits[j] ^ bits[k]) as f64;
                    idx += 1;
                }
            }
        }
        self.eps[0] * linear + self.eps[1] * pair + self.eps[2] * triple
    }

    /// Enumerates all `2^M` states and normalizes `exp(A)`. Bits are named
    /// `s1..sM`; bit `i` occupies mixed-radix position `i` (so `s1` is the
    /// slowest-varying digit).
    pub fn build_distribution(&self) -> Result<DiscreteJointDistribution> {
        if self.m > MAX_MODEL_BITS {
            return Err(Error::InvalidArgument(format!(
                "M = {} exceeds the exact-enumeration cap of {MAX_MODEL_BITS} bits",
                self.m
            )));
        }
        let len = 1usize << self.m;
        let mut log_w = Vec::with_capacity(len);
        let mut bits = vec![0u8; self.m];
        for state in 0..len {
            for (i, bit) in bits.iter_mut().enumerate() {
                *bit = ((state >> (self.m - 1 - i)) & 1) as u8;
            }
            log_w.push(self.log_weight(&bits));
        }
        // Shift by the max before exponentiating to keep Z well conditioned.
        let shift = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = log_w.iter().map(|w| (w - shift).exp()).collect();
        let z: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= z;
        }
        let vars: Vec<(VariableId, Alphabet)> = (0..self.m)
            .map(|i| (VariableId::new(i, format!("s{}", i + 1)), Alphabet::new(2).unwrap()))
            .collect();
        Ok(DiscreteJointDistribution::from_validated(
            vars,
            probs,
            LogBase::Nats,
        ))
    }

    /// Reads the spec file format:
    /// `{"M":8,"eps":[..],"seed":..,"mask":"none","a":[..],"b":[..],"c":[..]}`.
    /// Coefficients are optional on input and regenerated from the seed when
    /// absent; `target_vars` defaults to the last three bits.
    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: SpecFile = serde_json::from_reader(reader)?;
        let targets = file.target_vars.unwrap_or_else(|| default_targets(file.m));
        match (file.a, file.b, file.c) {
            (Some(a), Some(b), Some(c)) => Self::from_parts(
                file.m, file.eps, a, b, c, targets, file.seed, file.mask,
            ),
            (None, None, None) => generate_spec_with_targets(
                file.m, file.eps[0], file.eps[1], file.eps[2], file.seed, file.mask, targets,
            ),
            _ => Err(Error::Parse(
                "either all of a, b, c must be present or none of them".into(),
            )),
        }
    }

    /// Writes the spec with all coefficients included, for reproducibility.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let file = SpecFile {
            m: self.m,
            eps: self.eps,
            seed: self.coefficient_seed,
            mask: self.mask,
            a: Some(self.a.clone()),
            b: Some(self.b.clone()),
            c: Some(self.c.clone()),
            target_vars: Some(self.target_vars.clone()),
        };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    #[serde(rename = "M")]
    m: usize,
    eps: [f64; 3],
    seed: u64,
    mask: MaskPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_vars: Option<Vec<usize>>,
}

/// The reshaped benchmark table: binary features `X1..` followed by one joint
/// target variable `Y` of cardinality `2^(#target bits)`.
#[derive(Debug, Clone)]
pub struct SplitModel {
    pub dist: DiscreteJointDistribution,
    pub features: Vec<VariableId>,
    pub target: VariableId,
}

/// Regroups the spec's target bits of an M-bit table into a single joint
/// variable. The reshaping is a bijection on states: target bits are read in
/// ascending index order, most significant first.
pub fn split_target(
    dist: &DiscreteJointDistribution,
    spec: &XorModelSpec,
) -> Result<SplitModel> {
    if dist.num_vars() != spec.m {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} variables, spec says M = {}",
            dist.num_vars(),
            spec.m
        )));
    }
    for i in 0..dist.num_vars() {
        if dist.cardinality(i) != 2 {
            return Err(Error::InvalidArgument(
                "the model table must be over binary variables".into(),
            ));
        }
    }
    let targets = spec.target_vars();
    let feature_bits = spec.feature_vars();
    let t = targets.len();
    let f = feature_bits.len();
    let y_card = 1usize << t;

    let m = spec.m;
    let bit = |cell: usize, pos: usize| (cell >> (m - 1 - pos)) & 1;

    let mut out = vec![0.0; dist.table_len()];
    for (cell, &p) in dist.probs().iter().enumerate() {
        let mut x = 0usize;
        for &fb in &feature_bits {
            x = (x << 1) | bit(cell, fb);
        }
        let mut y = 0usize;
        for &tb in targets {
            y = (y << 1) | bit(cell, tb);
        }
        out[x * y_card + y] = p;
    }

    let mut vars: Vec<(VariableId, Alphabet)> = (0..f)
        .map(|i| (VariableId::new(i, format!("X{}", i + 1)), Alphabet::new(2).unwrap()))
        .collect();
    vars.push((VariableId::new(f, "Y"), Alphabet::new(y_card)?));
    let features: Vec<VariableId> = vars[..f].iter().map(|(id, _)| id.clone()).collect();
    let target = vars[f].0.clone();
    Ok(SplitModel {
        dist: DiscreteJointDistribution::from_validated(vars, out, dist.log_base()),
        features,
        target,
    })
}

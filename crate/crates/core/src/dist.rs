//! Dense joint probability tables over named finite-alphabet variables,
//! categorical sampling, and empirical tables built from samples.
//!
//! Tables are stored as flat `Vec<f64>` in row-major mixed-radix order with
//! the **last variable varying fastest**: the cell for values `(v_0, .., v_m)`
//! sits at `Σ v_i · stride_i` where `stride_m = 1` and
//! `stride_i = stride_{i+1} · cardinality_{i+1}`.
//!
//! Distributions and sample sets are immutable after construction; every
//! operation is a pure function and safe to call concurrently.

use std::fmt;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability tables must sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Logarithm base for reported information values.
///
/// Internally everything is computed with natural logarithms; a table
/// configured for bits reports values divided by ln 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    /// Multiplier taking a natural-log value into this base.
    pub fn scale(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogBase::Nats => write!(f, "nats"),
            LogBase::Bits => write!(f, "bits"),
        }
    }
}

/// Identifies one variable of a distribution: its position and its label.
///
/// Indices are unique and contiguous within a single distribution. Operations
/// validate that both the index and the name match the distribution they are
/// applied to, so ids from one table cannot silently address another.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableId {
    pub index: usize,
    pub name: String,
}

impl VariableId {
    pub fn new(index: usize, name: impl Into<String>) -> Self {
        VariableId {
            index,
            name: name.into(),
        }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Value range of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    cardinality: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(cardinality: usize) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::InvalidArgument(
                "alphabet cardinality must be at least 1".into(),
            ));
        }
        Ok(Alphabet {
            cardinality,
            labels: None,
        })
    }

    /// Alphabet whose values carry labels; the labels must be distinct.
    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::InvalidArgument(
                "alphabet labels must be distinct".into(),
            ));
        }
        let mut alphabet = Alphabet::new(labels.len())?;
        alphabet.labels = Some(labels);
        Ok(alphabet)
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

/// Exact joint distribution of finitely many discrete variables, stored as a
/// dense probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointDistribution {
    vars: Vec<(VariableId, Alphabet)>,
    strides: Vec<usize>,
    probs: Vec<f64>,
    log_base: LogBase,
}

fn build_vars(names_cards: &[(&str, usize)]) -> Result<Vec<(VariableId, Alphabet)>> {
    names_cards
        .iter()
        .enumerate()
        .map(|(i, (name, card))| Ok((VariableId::new(i, *name), Alphabet::new(*card)?)))
        .collect()
}

fn compute_strides(vars: &[(VariableId, Alphabet)]) -> Vec<usize> {
    let mut strides = vec![1usize; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * vars[i + 1].1.cardinality();
    }
    strides
}

impl DiscreteJointDistribution {
    /// Builds a distribution from `(name, cardinality)` pairs and a dense
    /// probability vector in the documented mixed-radix order.
    pub fn new(names_cards: &[(&str, usize)], probs: Vec<f64>, log_base: LogBase) -> Result<Self> {
        Self::with_alphabets(build_vars(names_cards)?, probs, log_base)
    }

    pub fn with_alphabets(
        vars: Vec<(VariableId, Alphabet)>,
        probs: Vec<f64>,
        log_base: LogBase,
    ) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument(
                "a distribution needs at least one variable".into(),
            ));
        }
        for (i, (id, _)) in vars.iter().enumerate() {
            if id.index != i {
                return Err(Error::InvalidArgument(format!(
                    "variable `{}` has index {} but sits at position {}",
                    id.name, id.index, i
                )));
            }
            if vars.iter().filter(|(v, _)| v.name == id.name).count() > 1 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate variable name `{}`",
                    id.name
                )));
            }
        }
        let expected: usize = vars.iter().map(|(_, a)| a.cardinality()).product();
        if probs.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {} from the alphabet sizes",
                probs.len(),
                expected
            )));
        }
        if let Some(p) = probs.iter().find(|&&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "probabilities must be finite and non-negative, got {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self::from_validated(vars, probs, log_base))
    }

    /// Internal constructor for tables that are normalized by construction
    /// (marginals, conditionals, empirical counts).
    pub(crate) fn from_validated(
        vars: Vec<(VariableId, Alphabet)>,
        probs: Vec<f64>,
        log_base: LogBase,
    ) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let strides = compute_strides(&vars);
        DiscreteJointDistribution {
            vars,
            strides,
            probs,
            log_base,
        }
    }

    /// Uniform distribution over the given variables.
    pub fn uniform(names_cards: &[(&str, usize)]) -> Result<Self> {
        let vars = build_vars(names_cards)?;
        let len: usize = vars.iter().map(|(_, a)| a.cardinality()).product();
        let p = 1.0 / len as f64;
        Self::with_alphabets(vars, vec![p; len], LogBase::Nats)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn table_len(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    /// Same table, values reported in `base` from now on.
    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.vars.iter().map(|(id, _)| id)
    }

    pub fn variable_ids(&self) -> Vec<VariableId> {
        self.variables().cloned().collect()
    }

    pub fn alphabet(&self, index: usize) -> Option<&Alphabet> {
        self.vars.get(index).map(|(_, a)| a)
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.vars[index].1.cardinality()
    }

    /// Looks a variable up by name.
    pub fn var(&self, name: &str) -> Result<VariableId> {
        self.variables()
            .find(|id| id.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    /// Validates that `id` belongs to this distribution and returns its position.
    pub(crate) fn position_of(&self, id: &VariableId) -> Result<usize> {
        match self.vars.get(id.index) {
            Some((v, _)) if v.name == id.name => Ok(id.index),
            _ => Err(Error::UnknownVariable(format!(
                "{} (index {})",
                id.name, id.index
            ))),
        }
    }

    pub(crate) fn stride(&self, position: usize) -> usize {
        self.strides[position]
    }

    /// Digit of `cell` belonging to the variable at `position`.
    #[inline]
    pub(crate) fn digit(&self, cell: usize, position: usize) -> u32 {
        ((cell / self.strides[position]) % self.vars[position].1.cardinality()) as u32
    }

    /// Flat index of a full value assignment.
    pub fn cell_index(&self, values: &[u32]) -> Result<usize> {
        if values.len() != self.num_vars() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} values, expected {}",
                values.len(),
                self.num_vars()
            )));
        }
        let mut idx = 0usize;
        for (pos, &v) in values.iter().enumerate() {
            if v as usize >= self.cardinality(pos) {
                return Err(Error::InvalidArgument(format!(
                    "value {v} out of range for `{}` (cardinality {})",
                    self.vars[pos].0.name,
                    self.cardinality(pos)
                )));
            }
            idx += v as usize * self.strides[pos];
        }
        Ok(idx)
    }

    /// Value assignment at a flat index.
    pub fn cell_values(&self, cell: usize) -> Vec<u32> {
        (0..self.num_vars()).map(|pos| self.digit(cell, pos)).collect()
    }

    pub fn prob(&self, values: &[u32]) -> Result<f64> {
        Ok(self.probs[self.cell_index(values)?])
    }

    /// Sums the table over every variable not in `keep`. The kept variables
    /// appear in their original relative order, reindexed from zero.
    pub fn marginalize(&self, keep: &[VariableId]) -> Result<DiscreteJointDistribution> {
        let mut positions: Vec<usize> = keep
            .iter()
            .map(|id| self.position_of(id))
            .collect::<Result<_>>()?;
        positions.sort_unstable();
        positions.dedup();
        if positions.is_empty() {
            return Err(Error::InvalidArgument(
                "the kept variable set must be non-empty".into(),
            ));
        }
        if positions.len() == self.num_vars() {
            return Ok(self.clone());
        }

        let out_vars: Vec<(VariableId, Alphabet)> = positions
            .iter()
            .enumerate()
            .map(|(new_idx, &pos)| {
                (
                    VariableId::new(new_idx, self.vars[pos].0.name.clone()),
                    self.vars[pos].1.clone(),
                )
            })
            .collect();
        let out_strides = compute_strides(&out_vars);
        let out_len: usize = out_vars.iter().map(|(_, a)| a.cardinality()).product();

        let mut out = vec![0.0; out_len];
        for (cell, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut oi = 0usize;
            for (slot, &pos) in positions.iter().enumerate() {
                oi += self.digit(cell, pos) as usize * out_strides[slot];
            }
            out[oi] += p;
        }
        Ok(Self::from_validated(out_vars, out, self.log_base))
    }

    /// Conditional distribution over the remaining variables given
    /// `given = value`.
    pub fn condition(&self, given: &VariableId, value: u32) -> Result<DiscreteJointDistribution> {
        let pos = self.position_of(given)?;
        if self.num_vars() < 2 {
            return Err(Error::InvalidArgument(
                "conditioning needs at least one remaining variable".into(),
            ));
        }
        if value as usize >= self.cardinality(pos) {
            return Err(Error::InvalidArgument(format!(
                "value {value} out of range for `{}` (cardinality {})",
                given.name,
                self.cardinality(pos)
            )));
        }

        let rest: Vec<usize> = (0..self.num_vars()).filter(|&p| p != pos).collect();
        let out_vars: Vec<(VariableId, Alphabet)> = rest
            .iter()
            .enumerate()
            .map(|(new_idx, &p)| {
                (
                    VariableId::new(new_idx, self.vars[p].0.name.clone()),
                    self.vars[p].1.clone(),
                )
            })
            .collect();
        let out_strides = compute_strides(&out_vars);
        let out_len: usize = out_vars.iter().map(|(_, a)| a.cardinality()).product();

        let mut out = vec![0.0; out_len];
        let mut mass = 0.0;
        for (cell, &p) in self.probs.iter().enumerate() {
            if self.digit(cell, pos) != value {
                continue;
            }
            mass += p;
            if p == 0.0 {
                continue;
            }
            let mut oi = 0usize;
            for (slot, &rp) in rest.iter().enumerate() {
                oi += self.digit(cell, rp) as usize * out_strides[slot];
            }
            out[oi] += p;
        }
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityValue {
                variable: given.name.clone(),
                value,
            });
        }
        for p in &mut out {
            *p /= mass;
        }
        Ok(Self::from_validated(out_vars, out, self.log_base))
    }

    /// Draws `n` i.i.d. samples by inverse-CDF categorical sampling.
    /// Deterministic given the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be at least 1".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(self.table_len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cumulative.push(acc);
        }
        // Guard against u falling beyond the floating-point total.
        let last_support = self
            .probs
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("a normalized table has positive mass");

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let num_vars = self.num_vars();
        let mut data = Vec::with_capacity(n * num_vars);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let cell = cumulative.partition_point(|&c| c <= u).min(last_support);
            for pos in 0..num_vars {
                data.push(self.digit(cell, pos));
            }
        }
        Ok(SampleSet {
            vars: self.vars.clone(),
            data,
        })
    }

    /// Total-variation distance to another table over the same variables.
    pub fn total_variation(&self, other: &DiscreteJointDistribution) -> Result<f64> {
        if self.vars.len() != other.vars.len() || self.table_len() != other.table_len() {
            return Err(Error::InvalidArgument(
                "total variation needs identically shaped tables".into(),
            ));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
            / 2.0)
    }

    /// Reads the JSON file format:
    /// `{"variables":[{"name":..,"cardinality":..}],"probs":[..],"log_base":"nats"}`.
    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: DistFile = serde_json::from_reader(reader)?;
        let vars = file
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| Ok((VariableId::new(i, v.name.clone()), Alphabet::new(v.cardinality)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_alphabets(vars, file.probs, file.log_base)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let file = DistFile {
            variables: self
                .vars
                .iter()
                .map(|(id, a)| VariableFile {
                    name: id.name.clone(),
                    cardinality: a.cardinality(),
                })
                .collect(),
            probs: self.probs.clone(),
            log_base: self.log_base,
        };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DistFile {
    variables: Vec<VariableFile>,
    probs: Vec<f64>,
    #[serde(default)]
    log_base: LogBase,
}

#[derive(Serialize, Deserialize)]
struct VariableFile {
    name: String,
    cardinality: usize,
}

/// Derives an independent sub-stream seed from a root seed and a task index.
///
/// The rule is fixed so parallel and serial runs agree: the task index is
/// spread by the golden-ratio constant and the result is passed through the
/// splitmix64 finalizer.
pub fn derive_seed(root: u64, task: u64) -> u64 {
    let mut z = root ^ task.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rows of observed variable values; the source of empirical probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    vars: Vec<(VariableId, Alphabet)>,
    /// Row-major values, `num_vars` entries per sample.
    data: Vec<u32>,
}

impl SampleSet {
    pub fn new(names_cards: &[(&str, usize)], rows: &[Vec<u32>]) -> Result<Self> {
        let vars = build_vars(names_cards)?;
        let mut data = Vec::with_capacity(rows.len() * vars.len());
        for row in rows {
            if row.len() != vars.len() {
                return Err(Error::InvalidArgument(format!(
                    "row has {} values, expected {}",
                    row.len(),
                    vars.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(vars, data)
    }

    pub(crate) fn from_flat(vars: Vec<(VariableId, Alphabet)>, data: Vec<u32>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument(
                "a sample set needs at least one variable".into(),
            ));
        }
        if data.is_empty() || !data.len().is_multiple_of(vars.len()) {
            return Err(Error::InvalidArgument(
                "a sample set needs at least one complete row".into(),
            ));
        }
        for row in data.chunks_exact(vars.len()) {
            for (pos, &v) in row.iter().enumerate() {
                if v as usize >= vars[pos].1.cardinality() {
                    return Err(Error::InvalidArgument(format!(
                        "value {v} out of range for `{}` (cardinality {})",
                        vars[pos].0.name,
                        vars[pos].1.cardinality()
                    )));
                }
            }
        }
        Ok(SampleSet { vars, data })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.data.len() / self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.vars.iter().map(|(id, _)| id)
    }

    pub fn var(&self, name: &str) -> Result<VariableId> {
        self.variables()
            .find(|id| id.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks_exact(self.vars.len())
    }

    /// Counts every cell and divides by the number of samples. Unobserved
    /// cells get exactly zero.
    pub fn empirical(&self) -> EmpiricalDistribution {
        let strides = compute_strides(&self.vars);
        let table_len: usize = self.vars.iter().map(|(_, a)| a.cardinality()).product();
        let mut counts = vec![0u64; table_len];
        for row in self.rows() {
            let mut idx = 0usize;
            for (pos, &v) in row.iter().enumerate() {
                idx += v as usize * strides[pos];
            }
            counts[idx] += 1;
        }
        let n = self.len() as f64;
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        EmpiricalDistribution {
            dist: DiscreteJointDistribution::from_validated(
                self.vars.clone(),
                probs,
                LogBase::Nats,
            ),
            sample_count: self.len() as u64,
        }
    }

    /// Writes the CSV sample format: a header of variable names, then one row
    /// of integer alphabet indices per sample.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.variables().map(|id| id.name.as_str()))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV sample format. Cardinalities are inferred as
    /// `max observed value + 1` per column; use
    /// [`SampleSet::read_csv_with_alphabets`] when the true alphabets are known.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (names, rows) = parse_sample_csv(reader)?;
        let cards: Vec<usize> = (0..names.len())
            .map(|col| rows.iter().map(|r| r[col] as usize + 1).max().unwrap_or(1))
            .collect();
        let named: Vec<(&str, usize)> = names
            .iter()
            .map(|n| n.as_str())
            .zip(cards)
            .collect();
        Self::new(&named, &rows)
    }

    /// Reads the CSV sample format with declared alphabets. The header names
    /// must match `names_cards` exactly (same order).
    pub fn read_csv_with_alphabets<R: Read>(
        reader: R,
        names_cards: &[(&str, usize)],
    ) -> Result<Self> {
        let (names, rows) = parse_sample_csv(reader)?;
        if names.len() != names_cards.len()
            || names
                .iter()
                .zip(names_cards)
                .any(|(got, (want, _))| got != want)
        {
            return Err(Error::Parse(format!(
                "sample header [{}] does not match the declared variables [{}]",
                names.join(","),
                names_cards
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(",")
            )));
        }
        Self::new(names_cards, &rows)
    }
}

fn parse_sample_csv<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<u32>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names: Vec<String> = r
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() {
        return Err(Error::Parse("sample CSV has an empty header".into()));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row: Vec<u32> = record
            .iter()
            .map(|field| {
                field
                    .trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad sample value `{field}`: {e}")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("sample CSV has no data rows".into()));
    }
    Ok((names, rows))
}

/// An empirical probability table together with the sample count it came from.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    dist: DiscreteJointDistribution,
    sample_count: u64,
}

impl EmpiricalDistribution {
    /// Wraps an existing table as if it were empirical. Mainly for feeding
    /// exact tables through estimator code paths.
    pub fn from_distribution(dist: DiscreteJointDistribution, sample_count: u64) -> Self {
        EmpiricalDistribution { dist, sample_count }
    }

    pub fn dist(&self) -> &DiscreteJointDistribution {
        &self.dist
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.dist = self.dist.with_log_base(base);
        self
    }
}

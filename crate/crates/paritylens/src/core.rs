//! Dataset model: schemas, records, ingestion, joint distributions and
//! randomized decision rules.
//!
//! A dataset holds individual records, each carrying a *sensitive* trait
//! profile (the traits a decision must not depend on), a *permissible* trait
//! profile (the traits it may depend on), a binary ground-truth outcome and a
//! binary decision. Trait values are interned per dimension: each dimension
//! assigns dense integer ids to its labels in first-appearance order, and
//! records store ids. Analysis layers work with [`Profile`]s — ordered label
//! vectors — so that everything downstream is independent of id assignment.
//!
//! A *group* is always a full sensitive profile: with several sensitive
//! dimensions, every distinct combination is its own group, which is the
//! strictest reading of cross-group comparisons.

use crate::rational::{rat_u, RateValue, Rational};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io;
use std::path::Path;

/// One categorical value of a trait dimension: a dense id paired with its
/// label. Ids are dense per dimension and `id <-> label` is a bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitValue {
    pub id: u16,
    pub label: String,
}

/// A named categorical dimension with its label vocabulary.
/// The id of a label is its index in `values`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    pub name: String,
    pub values: Vec<String>,
}

impl Dimension {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Self {
        Dimension {
            name: name.into(),
            values,
        }
    }

    /// Looks up the dense id of a label.
    pub fn id_of(&self, label: &str) -> Option<u16> {
        self.values.iter().position(|v| v == label).map(|i| i as u16)
    }

    /// The label of a dense id.
    pub fn label_of(&self, id: u16) -> Option<&str> {
        self.values.get(id as usize).map(|s| s.as_str())
    }

    pub fn trait_values(&self) -> impl Iterator<Item = TraitValue> + '_ {
        self.values.iter().enumerate().map(|(i, v)| TraitValue {
            id: i as u16,
            label: v.clone(),
        })
    }
}

/// Dataset schema: sensitive dimensions, permissible dimensions, and the
/// names of the outcome and decision columns. A dataset may have zero
/// permissible dimensions (every record then shares the single empty
/// permissible profile).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub sensitive: Vec<Dimension>,
    pub permissible: Vec<Dimension>,
    pub outcome: String,
    pub decision: String,
}

/// One observed individual (or a block of identical individuals).
///
/// `count` is an integer multiplicity: ingestion from row data always
/// produces `count == 1`, while datasets expanded from probability mass
/// tables carry the cell multiplicities directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualRecord {
    pub sensitive: Vec<u16>,
    pub permissible: Vec<u16>,
    pub outcome: bool,
    pub decision: bool,
    pub count: u64,
}

/// An ordered vector of trait labels, used as the group key (full sensitive
/// profile) and the permissible key everywhere above the storage layer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile(pub Vec<String>);

impl Profile {
    pub fn single(label: impl Into<String>) -> Self {
        Profile(vec![label.into()])
    }

    pub fn empty() -> Self {
        Profile(Vec::new())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "-")
        } else {
            write!(f, "{}", self.0.join("|"))
        }
    }
}

/// Errors produced while building or reading datasets.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("input has no data rows")]
    EmptyInput,
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("column {0:?} is assigned more than one role")]
    DuplicateColumn(String),
    #[error("row {row}: column {column:?} has non-binary value {value:?} (expected 0/1 or true/false)")]
    NonBinaryValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension {0:?} has more than 65535 distinct values")]
    VocabularyTooLarge(String),
    #[error("record references id {id} outside dimension {dimension:?}")]
    UnknownId { dimension: String, id: u16 },
    #[error("label {label:?} is not in the vocabulary of dimension {dimension:?}")]
    UnknownLabel { dimension: String, label: String },
    #[error("record has {found} values for {kind} profile, schema has {expected}")]
    ProfileArity {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("record multiplicity must be at least 1")]
    ZeroCount,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("json dataset: {0}")]
    JsonShape(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// Column-role assignment used by CSV ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRoles {
    pub sensitive: Vec<String>,
    pub permissible: Vec<String>,
    pub outcome: String,
    pub decision: String,
}

impl ColumnRoles {
    fn validate(&self) -> Result<(), IngestError> {
        let mut seen = BTreeSet::new();
        for name in self
            .sensitive
            .iter()
            .chain(self.permissible.iter())
            .chain([&self.outcome, &self.decision])
        {
            if !seen.insert(name.clone()) {
                return Err(IngestError::DuplicateColumn(name.clone()));
            }
        }
        if self.sensitive.is_empty() {
            return Err(IngestError::MissingColumn("<sensitive>".to_string()));
        }
        Ok(())
    }
}

/// A dataset: schema plus records. `n` is the total multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    records: Vec<IndividualRecord>,
    n: u64,
}

fn parse_binary(token: &str) -> Option<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "0" | "false" | "no" => Some(false),
        "1" | "true" | "yes" => Some(true),
        _ => None,
    }
}

impl Dataset {
    /// Builds a dataset from parts, validating that every record is
    /// consistent with the schema.
    pub fn from_parts(
        schema: Schema,
        records: Vec<IndividualRecord>,
    ) -> Result<Self, IngestError> {
        if records.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        let mut n: u64 = 0;
        for rec in &records {
            if rec.count == 0 {
                return Err(IngestError::ZeroCount);
            }
            if rec.sensitive.len() != schema.sensitive.len() {
                return Err(IngestError::ProfileArity {
                    kind: "sensitive",
                    expected: schema.sensitive.len(),
                    found: rec.sensitive.len(),
                });
            }
            if rec.permissible.len() != schema.permissible.len() {
                return Err(IngestError::ProfileArity {
                    kind: "permissible",
                    expected: schema.permissible.len(),
                    found: rec.permissible.len(),
                });
            }
            for (dim, &id) in schema.sensitive.iter().zip(&rec.sensitive) {
                if id as usize >= dim.values.len() {
                    return Err(IngestError::UnknownId {
                        dimension: dim.name.clone(),
                        id,
                    });
                }
            }
            for (dim, &id) in schema.permissible.iter().zip(&rec.permissible) {
                if id as usize >= dim.values.len() {
                    return Err(IngestError::UnknownId {
                        dimension: dim.name.clone(),
                        id,
                    });
                }
            }
            n += rec.count;
        }
        Ok(Dataset {
            schema,
            records,
            n,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[IndividualRecord] {
        &self.records
    }

    /// Total number of individuals (sum of record multiplicities).
    pub fn n(&self) -> u64 {
        self.n
    }

    /// The sensitive profile of a record, as labels.
    pub fn group_of(&self, rec: &IndividualRecord) -> Profile {
        Profile(
            self.schema
                .sensitive
                .iter()
                .zip(&rec.sensitive)
                .map(|(dim, &id)| dim.values[id as usize].clone())
                .collect(),
        )
    }

    /// The permissible profile of a record, as labels.
    pub fn permissible_of(&self, rec: &IndividualRecord) -> Profile {
        Profile(
            self.schema
                .permissible
                .iter()
                .zip(&rec.permissible)
                .map(|(dim, &id)| dim.values[id as usize].clone())
                .collect(),
        )
    }

    /// All distinct sensitive groups, sorted.
    pub fn groups(&self) -> Vec<Profile> {
        let mut set = BTreeSet::new();
        for rec in &self.records {
            set.insert(self.group_of(rec));
        }
        set.into_iter().collect()
    }

    /// Empirical joint distribution of (group, permissible, outcome) with
    /// exact rational masses `count / n`.
    pub fn joint_distribution(&self) -> JointDistribution {
        let mut counts: HashMap<(Vec<u16>, Vec<u16>, bool), u64> = HashMap::new();
        for rec in &self.records {
            *counts
                .entry((rec.sensitive.clone(), rec.permissible.clone(), rec.outcome))
                .or_insert(0) += rec.count;
        }
        let mut masses = BTreeMap::new();
        for ((s, p, y), c) in counts {
            let rec = IndividualRecord {
                sensitive: s,
                permissible: p,
                outcome: y,
                decision: false,
                count: c,
            };
            let key = (self.group_of(&rec), self.permissible_of(&rec), y);
            masses.insert(key, rat_u(c, self.n));
        }
        JointDistribution { masses }
    }

    /// Empirical decision-rule table `P[decision = 1 | group, permissible]`,
    /// flagged as empirical.
    pub fn empirical_algorithm(&self) -> RandomizedAlgorithm {
        let mut hired: BTreeMap<(Profile, Profile), u64> = BTreeMap::new();
        let mut total: BTreeMap<(Profile, Profile), u64> = BTreeMap::new();
        for rec in &self.records {
            let key = (self.group_of(rec), self.permissible_of(rec));
            *total.entry(key.clone()).or_insert(0) += rec.count;
            if rec.decision {
                *hired.entry(key).or_insert(0) += rec.count;
            }
        }
        let table = total
            .into_iter()
            .map(|(key, t)| {
                let h = hired.get(&key).copied().unwrap_or(0);
                (key, rat_u(h, t))
            })
            .collect();
        RandomizedAlgorithm {
            table,
            empirical: true,
        }
    }
}

/// Reads a CSV dataset (header row required) with the given column roles.
pub fn ingest_csv<R: io::Read>(reader: R, roles: &ColumnRoles) -> Result<Dataset, IngestError> {
    roles.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let sens_idx: Vec<usize> = roles
        .sensitive
        .iter()
        .map(|c| position(c))
        .collect::<Result<_, _>>()?;
    let perm_idx: Vec<usize> = roles
        .permissible
        .iter()
        .map(|c| position(c))
        .collect::<Result<_, _>>()?;
    let out_idx = position(&roles.outcome)?;
    let dec_idx = position(&roles.decision)?;

    let mut sens_dims: Vec<Dimension> = roles
        .sensitive
        .iter()
        .map(|c| Dimension::new(c.clone(), Vec::new()))
        .collect();
    let mut perm_dims: Vec<Dimension> = roles
        .permissible
        .iter()
        .map(|c| Dimension::new(c.clone(), Vec::new()))
        .collect();

    let intern = |dim: &mut Dimension, label: &str| -> Result<u16, IngestError> {
        if let Some(id) = dim.id_of(label) {
            return Ok(id);
        }
        if dim.values.len() > u16::MAX as usize {
            return Err(IngestError::VocabularyTooLarge(dim.name.clone()));
        }
        dim.values.push(label.to_string());
        Ok((dim.values.len() - 1) as u16)
    };

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let rownum = i + 2; // 1-based, after the header
        if row.len() != headers.len() {
            return Err(IngestError::RaggedRow {
                row: rownum,
                expected: headers.len(),
                found: row.len(),
            });
        }
        let mut sensitive = Vec::with_capacity(sens_idx.len());
        for (k, &ci) in sens_idx.iter().enumerate() {
            sensitive.push(intern(&mut sens_dims[k], &row[ci])?);
        }
        let mut permissible = Vec::with_capacity(perm_idx.len());
        for (k, &ci) in perm_idx.iter().enumerate() {
            permissible.push(intern(&mut perm_dims[k], &row[ci])?);
        }
        let outcome = parse_binary(&row[out_idx]).ok_or_else(|| IngestError::NonBinaryValue {
            row: rownum,
            column: roles.outcome.clone(),
            value: row[out_idx].to_string(),
        })?;
        let decision = parse_binary(&row[dec_idx]).ok_or_else(|| IngestError::NonBinaryValue {
            row: rownum,
            column: roles.decision.clone(),
            value: row[dec_idx].to_string(),
        })?;
        records.push(IndividualRecord {
            sensitive,
            permissible,
            outcome,
            decision,
            count: 1,
        });
    }
    let schema = Schema {
        sensitive: sens_dims,
        permissible: perm_dims,
        outcome: roles.outcome.clone(),
        decision: roles.decision.clone(),
    };
    Dataset::from_parts(schema, records)
}

/// Reads a CSV dataset from a path.
pub fn ingest_csv_path(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Dataset, IngestError> {
    let file = std::fs::File::open(path)?;
    ingest_csv(io::BufReader::new(file), roles)
}

/// Writes the dataset as CSV, expanding record multiplicities into rows.
pub fn write_csv<W: io::Write>(dataset: &Dataset, writer: W) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = dataset.schema();
    let mut header: Vec<&str> = Vec::new();
    header.extend(schema.sensitive.iter().map(|d| d.name.as_str()));
    header.extend(schema.permissible.iter().map(|d| d.name.as_str()));
    header.push(&schema.outcome);
    header.push(&schema.decision);
    wtr.write_record(&header)?;
    for rec in dataset.records() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for (dim, &id) in schema.sensitive.iter().zip(&rec.sensitive) {
            row.push(dim.values[id as usize].clone());
        }
        for (dim, &id) in schema.permissible.iter().zip(&rec.permissible) {
            row.push(dim.values[id as usize].clone());
        }
        row.push(if rec.outcome { "1" } else { "0" }.to_string());
        row.push(if rec.decision { "1" } else { "0" }.to_string());
        for _ in 0..rec.count {
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

mod json_model {
    //! Serde mirror of the on-disk JSON dataset format:
    //! `{"schema": {...}, "records": [...]}`.
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    pub struct DimensionJson {
        pub name: String,
        pub values: Vec<String>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct SchemaJson {
        pub sensitive: Vec<DimensionJson>,
        #[serde(default)]
        pub permissible: Vec<DimensionJson>,
        pub outcome: String,
        pub decision: String,
    }

    #[derive(Serialize, Deserialize)]
    pub struct RecordJson {
        pub sensitive: Vec<String>,
        #[serde(default)]
        pub permissible: Vec<String>,
        pub outcome: serde_json::Value,
        pub decision: serde_json::Value,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        pub count: u64,
    }

    #[derive(Serialize, Deserialize)]
    pub struct DatasetJson {
        pub schema: SchemaJson,
        pub records: Vec<RecordJson>,
    }

    fn one() -> u64 {
        1
    }

    fn is_one(c: &u64) -> bool {
        *c == 1
    }
}

fn binary_from_json(v: &serde_json::Value) -> Option<bool> {
    match v {
        serde_json::Value::Bool(b) => Some(*b),
        serde_json::Value::Number(n) => match n.to_string().as_str() {
            "0" => Some(false),
            "1" => Some(true),
            _ => None,
        },
        serde_json::Value::String(s) => parse_binary(s),
        _ => None,
    }
}

/// Reads the JSON dataset format (`{"schema": ..., "records": ...}`).
pub fn ingest_json<R: io::Read>(reader: R) -> Result<Dataset, IngestError> {
    let model: json_model::DatasetJson = serde_json::from_reader(reader)?;
    let schema = Schema {
        sensitive: model
            .schema
            .sensitive
            .into_iter()
            .map(|d| Dimension::new(d.name, d.values))
            .collect(),
        permissible: model
            .schema
            .permissible
            .into_iter()
            .map(|d| Dimension::new(d.name, d.values))
            .collect(),
        outcome: model.schema.outcome,
        decision: model.schema.decision,
    };
    let mut records = Vec::with_capacity(model.records.len());
    for (i, rec) in model.records.into_iter().enumerate() {
        let resolve = |dims: &[Dimension], labels: &[String], kind: &'static str| {
            if labels.len() != dims.len() {
                return Err(IngestError::ProfileArity {
                    kind,
                    expected: dims.len(),
                    found: labels.len(),
                });
            }
            labels
                .iter()
                .zip(dims)
                .map(|(label, dim)| {
                    dim.id_of(label).ok_or_else(|| IngestError::UnknownLabel {
                        dimension: dim.name.clone(),
                        label: label.clone(),
                    })
                })
                .collect::<Result<Vec<u16>, _>>()
        };
        let sensitive = resolve(&schema.sensitive, &rec.sensitive, "sensitive")?;
        let permissible = resolve(&schema.permissible, &rec.permissible, "permissible")?;
        let outcome = binary_from_json(&rec.outcome).ok_or_else(|| IngestError::NonBinaryValue {
            row: i,
            column: schema.outcome.clone(),
            value: rec.outcome.to_string(),
        })?;
        let decision =
            binary_from_json(&rec.decision).ok_or_else(|| IngestError::NonBinaryValue {
                row: i,
                column: schema.decision.clone(),
                value: rec.decision.to_string(),
            })?;
        records.push(IndividualRecord {
            sensitive,
            permissible,
            outcome,
            decision,
            count: rec.count,
        });
    }
    Dataset::from_parts(schema, records)
}

/// Reads a JSON dataset from a path.
pub fn ingest_json_path(path: impl AsRef<Path>) -> Result<Dataset, IngestError> {
    let file = std::fs::File::open(path)?;
    ingest_json(io::BufReader::new(file))
}

/// Serializes the dataset to the JSON dataset format.
pub fn to_json(dataset: &Dataset) -> serde_json::Value {
    let schema = dataset.schema();
    let model = json_model::DatasetJson {
        schema: json_model::SchemaJson {
            sensitive: schema
                .sensitive
                .iter()
                .map(|d| json_model::DimensionJson {
                    name: d.name.clone(),
                    values: d.values.clone(),
                })
                .collect(),
            permissible: schema
                .permissible
                .iter()
                .map(|d| json_model::DimensionJson {
                    name: d.name.clone(),
                    values: d.values.clone(),
                })
                .collect(),
            outcome: schema.outcome.clone(),
            decision: schema.decision.clone(),
        },
        records: dataset
            .records()
            .iter()
            .map(|rec| json_model::RecordJson {
                sensitive: dataset.group_of(rec).0,
                permissible: dataset.permissible_of(rec).0,
                outcome: serde_json::Value::from(rec.outcome as u8),
                decision: serde_json::Value::from(rec.decision as u8),
                count: rec.count,
            })
            .collect(),
    };
    serde_json::to_value(model).expect("dataset serialization cannot fail")
}

/// A joint probability distribution over (group, permissible, outcome)
/// with exact rational masses summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    masses: BTreeMap<(Profile, Profile, bool), Rational>,
}

/// Errors for hand-built joint distributions.
#[derive(Debug, thiserror::Error)]
pub enum DistributionError {
    #[error("mass for cell ({group}, {permissible}, {outcome}) is negative")]
    NegativeMass {
        group: Profile,
        permissible: Profile,
        outcome: bool,
    },
    #[error("masses sum to {sum}, expected exactly 1")]
    DoesNotSumToOne { sum: Rational },
    #[error("duplicate cell ({group}, {permissible}, {outcome})")]
    DuplicateCell {
        group: Profile,
        permissible: Profile,
        outcome: bool,
    },
}

impl JointDistribution {
    /// Builds a joint distribution from explicit cell masses. Masses must be
    /// non-negative and sum to exactly one.
    pub fn from_masses(
        cells: impl IntoIterator<Item = ((Profile, Profile, bool), Rational)>,
    ) -> Result<Self, DistributionError> {
        let mut masses = BTreeMap::new();
        let mut sum = Rational::zero();
        for ((g, x, y), m) in cells {
            if m < Rational::zero() {
                return Err(DistributionError::NegativeMass {
                    group: g,
                    permissible: x,
                    outcome: y,
                });
            }
            sum += &m;
            if masses.insert((g.clone(), x.clone(), y), m).is_some() {
                return Err(DistributionError::DuplicateCell {
                    group: g,
                    permissible: x,
                    outcome: y,
                });
            }
        }
        if sum != Rational::from_integer(1.into()) {
            return Err(DistributionError::DoesNotSumToOne { sum });
        }
        Ok(JointDistribution { masses })
    }

    pub fn masses(&self) -> &BTreeMap<(Profile, Profile, bool), Rational> {
        &self.masses
    }

    /// Groups with positive total mass, sorted.
    pub fn groups(&self) -> Vec<Profile> {
        let mut set = BTreeSet::new();
        for ((g, _, _), m) in &self.masses {
            if !m.is_zero() {
                set.insert(g.clone());
            }
        }
        set.into_iter().collect()
    }

    /// All permissible values appearing with positive mass, sorted.
    pub fn permissible_values(&self) -> Vec<Profile> {
        let mut set = BTreeSet::new();
        for ((_, x, _), m) in &self.masses {
            if !m.is_zero() {
                set.insert(x.clone());
            }
        }
        set.into_iter().collect()
    }

    /// Total mass of a group.
    pub fn group_mass(&self, group: &Profile) -> Rational {
        self.masses
            .iter()
            .filter(|((g, _, _), _)| g == group)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass of one (group, permissible) cell, both outcomes.
    pub fn cell_mass(&self, group: &Profile, x: &Profile) -> Rational {
        let mut sum = Rational::zero();
        for y in [false, true] {
            if let Some(m) = self.masses.get(&(group.clone(), x.clone(), y)) {
                sum += m;
            }
        }
        sum
    }

    /// Mass of one (group, permissible, outcome) cell.
    pub fn mass(&self, group: &Profile, x: &Profile, y: bool) -> Rational {
        self.masses
            .get(&(group.clone(), x.clone(), y))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `P[outcome = 1 | group]`; undefined for a zero-mass group.
    pub fn base_rate(&self, group: &Profile) -> RateValue {
        let total = self.group_mass(group);
        let positive: Rational = self
            .masses
            .iter()
            .filter(|((g, _, y), _)| g == group && *y)
            .map(|(_, m)| m.clone())
            .sum();
        RateValue::ratio(positive, total)
    }

    /// `P[outcome = 1 | group, x]`; undefined when the cell has zero mass.
    pub fn posterior(&self, group: &Profile, x: &Profile) -> RateValue {
        let cell = self.cell_mass(group, x);
        let positive = self.mass(group, x, true);
        RateValue::ratio(positive, cell)
    }

    /// Posterior table over all positive-mass (group, permissible) cells.
    pub fn posteriors(&self) -> BTreeMap<(Profile, Profile), Rational> {
        let mut out = BTreeMap::new();
        let mut cells: BTreeMap<(Profile, Profile), (Rational, Rational)> = BTreeMap::new();
        for ((g, x, y), m) in &self.masses {
            let entry = cells
                .entry((g.clone(), x.clone()))
                .or_insert_with(|| (Rational::zero(), Rational::zero()));
            entry.0 += m;
            if *y {
                entry.1 += m;
            }
        }
        for ((g, x), (total, positive)) in cells {
            if !total.is_zero() {
                out.insert((g, x), positive / total);
            }
        }
        out
    }
}

/// A (possibly randomized) decision rule: an exact hire probability for each
/// (group, permissible) cell. `empirical` marks tables estimated from
/// observed decisions rather than given as a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomizedAlgorithm {
    table: BTreeMap<(Profile, Profile), Rational>,
    empirical: bool,
}

/// Errors for building decision-rule tables.
#[derive(Debug, thiserror::Error)]
pub enum AlgorithmError {
    #[error("probability {value} for cell ({group}, {permissible}) is outside [0, 1]")]
    ProbabilityOutOfRange {
        group: Profile,
        permissible: Profile,
        value: Rational,
    },
    #[error("duplicate cell ({group}, {permissible})")]
    DuplicateCell { group: Profile, permissible: Profile },
}

impl RandomizedAlgorithm {
    /// Builds a rule table, validating every probability is in `[0, 1]`.
    pub fn new(
        entries: impl IntoIterator<Item = ((Profile, Profile), Rational)>,
    ) -> Result<Self, AlgorithmError> {
        let mut table = BTreeMap::new();
        for ((g, x), p) in entries {
            if p < Rational::zero() || p > Rational::from_integer(1.into()) {
                return Err(AlgorithmError::ProbabilityOutOfRange {
                    group: g,
                    permissible: x,
                    value: p,
                });
            }
            if table.insert((g.clone(), x.clone()), p).is_some() {
                return Err(AlgorithmError::DuplicateCell {
                    group: g,
                    permissible: x,
                });
            }
        }
        Ok(RandomizedAlgorithm {
            table,
            empirical: false,
        })
    }

    pub fn is_empirical(&self) -> bool {
        self.empirical
    }

    /// Hire probability for one cell, if the table covers it.
    pub fn probability(&self, group: &Profile, x: &Profile) -> Option<&Rational> {
        self.table.get(&(group.clone(), x.clone()))
    }

    pub fn table(&self) -> &BTreeMap<(Profile, Profile), Rational> {
        &self.table
    }

    /// Groups covered by the table, sorted.
    pub fn groups(&self) -> Vec<Profile> {
        let mut set = BTreeSet::new();
        for (g, _) in self.table.keys() {
            set.insert(g.clone());
        }
        set.into_iter().collect()
    }

    /// Permissible values covered by the table, sorted.
    pub fn permissible_values(&self) -> Vec<Profile> {
        let mut set = BTreeSet::new();
        for (_, x) in self.table.keys() {
            set.insert(x.clone());
        }
        set.into_iter().collect()
    }
}

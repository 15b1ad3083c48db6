//! 0/1 knapsack model: items, capacity, the three benchmark families and an
//! exact dynamic-programming optimum.
//!
//! Capacity is kept as `capacity_x2 = 2C` so that the half-sum rule stays
//! exact for odd weight sums. A total weight `W` is feasible iff
//! `2W <= capacity_x2`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest DP table (items x budget cells) `dp_optimum` will allocate.
pub const DP_CELL_LIMIT: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    #[serde(rename = "w")]
    pub weight: u64,
    #[serde(rename = "p")]
    pub profit: u64,
}

impl Item {
    pub fn new(weight: u64, profit: u64) -> Self {
        Item { weight, profit }
    }
}

/// Instance family. `Custom` marks hand-built or externally supplied data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    I,
    II,
    III,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::I => "I",
            CaseTag::II => "II",
            CaseTag::III => "III",
            CaseTag::Custom => "custom",
        })
    }
}

impl FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(CaseTag::I),
            "II" => Ok(CaseTag::II),
            "III" => Ok(CaseTag::III),
            "custom" => Ok(CaseTag::Custom),
            other => Err(Error::invalid(format!("unknown case tag `{other}`"))),
        }
    }
}

/// An immutable knapsack problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    items: Vec<Item>,
    capacity_x2: u64,
    case: CaseTag,
    gen_seed: Option<u64>,
}

impl KnapsackInstance {
    /// Builds an instance with an explicit doubled capacity.
    pub fn new(
        items: Vec<Item>,
        capacity_x2: u64,
        case: CaseTag,
        gen_seed: Option<u64>,
    ) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("instance must contain at least one item"));
        }
        let total_w = items
            .iter()
            .try_fold(0u64, |acc, it| acc.checked_add(it.weight))
            .and_then(|w| w.checked_mul(2));
        let total_p = items
            .iter()
            .try_fold(0u64, |acc, it| acc.checked_add(it.profit));
        if total_w.is_none() || total_p.is_none() {
            return Err(Error::invalid("item totals overflow 64 bits"));
        }
        Ok(KnapsackInstance {
            items,
            capacity_x2,
            case,
            gen_seed,
        })
    }

    /// Builds an instance whose capacity is half the weight sum.
    pub fn with_half_capacity(
        items: Vec<Item>,
        case: CaseTag,
        gen_seed: Option<u64>,
    ) -> Result<Self> {
        let capacity_x2 = items
            .iter()
            .map(|it| it.weight)
            .fold(0u64, u64::saturating_add);
        Self::new(items, capacity_x2, case, gen_seed)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity_x2(&self) -> u64 {
        self.capacity_x2
    }

    /// Capacity as a float, for display only.
    pub fn capacity(&self) -> f64 {
        self.capacity_x2 as f64 / 2.0
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn gen_seed(&self) -> Option<u64> {
        self.gen_seed
    }

    pub fn weight_sum(&self) -> u64 {
        self.items.iter().map(|it| it.weight).sum()
    }

    /// Exact feasibility test for a total weight.
    #[inline]
    pub fn fits(&self, weight: u64) -> bool {
        (weight as u128) * 2 <= self.capacity_x2 as u128
    }

    /// Short human-readable tag, e.g. `case-I-k100-seed7`.
    pub fn describe(&self) -> String {
        match self.gen_seed {
            Some(seed) => format!("case-{}-k{}-seed{}", self.case, self.len(), seed),
            None => format!("case-{}-k{}", self.case, self.len()),
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            case: self.case,
            k: self.items.len(),
            seed: self.gen_seed,
            capacity_x2: self.capacity_x2,
            items: self.items.clone(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: InstanceFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        file.into_instance().map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text =
            serde_json::to_string_pretty(&self.to_file()).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// On-disk JSON form of an instance. Every number is an integer; the
/// capacity is stored doubled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub case: CaseTag,
    pub k: usize,
    pub seed: Option<u64>,
    pub capacity_x2: u64,
    pub items: Vec<Item>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<KnapsackInstance> {
        if self.k != self.items.len() {
            return Err(Error::invalid(format!(
                "k = {} but {} items listed",
                self.k,
                self.items.len()
            )));
        }
        KnapsackInstance::new(self.items, self.capacity_x2, self.case, self.seed)
    }
}

/// Generates one of the three benchmark families.
///
/// Weights are uniform integers in `1..=10`. Case I uses `p = w + 5`, Case II
/// `p = w + l` with `l` uniform in `0..=5`, Case III cycles `w = 1, 2, .., 10,
/// 1, ..` with `p = w + 5` and ignores the seed. Random draws come from
/// `ChaCha8Rng::seed_from_u64(seed)`, item by item (weight, then `l`).
pub fn generate_instance(case: CaseTag, k: usize, seed: u64) -> Result<KnapsackInstance> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<Item> = match case {
        CaseTag::I => (0..k)
            .map(|_| {
                let w = rng.gen_range(1..=10u64);
                Item::new(w, w + 5)
            })
            .collect(),
        CaseTag::II => (0..k)
            .map(|_| {
                let w = rng.gen_range(1..=10u64);
                let l = rng.gen_range(0..=5u64);
                Item::new(w, w + l)
            })
            .collect(),
        CaseTag::III => (0..k)
            .map(|i| {
                let w = (i % 10) as u64 + 1;
                Item::new(w, w + 5)
            })
            .collect(),
        CaseTag::Custom => {
            return Err(Error::invalid("custom instances cannot be generated"));
        }
    };
    let gen_seed = match case {
        CaseTag::III => None,
        _ => Some(seed),
    };
    KnapsackInstance::with_half_capacity(items, case, gen_seed)
}

fn check_len(bits: &[bool], inst: &KnapsackInstance) -> Result<()> {
    if bits.len() != inst.len() {
        return Err(Error::invalid(format!(
            "selection has {} bits, instance has {} items",
            bits.len(),
            inst.len()
        )));
    }
    Ok(())
}

/// Sum of the weights of the selected items.
pub fn total_weight(bits: &[bool], inst: &KnapsackInstance) -> Result<u64> {
    check_len(bits, inst)?;
    Ok(bits
        .iter()
        .zip(inst.items())
        .filter(|(&b, _)| b)
        .map(|(_, it)| it.weight)
        .sum())
}

/// Sum of the profits of the selected items.
pub fn total_profit(bits: &[bool], inst: &KnapsackInstance) -> Result<u64> {
    check_len(bits, inst)?;
    Ok(bits
        .iter()
        .zip(inst.items())
        .filter(|(&b, _)| b)
        .map(|(_, it)| it.profit)
        .sum())
}

/// A selection vector with cached weight and profit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    bits: Vec<bool>,
    weight: u64,
    profit: u64,
}

impl Solution {
    pub fn evaluate(bits: Vec<bool>, inst: &KnapsackInstance) -> Result<Self> {
        let weight = total_weight(&bits, inst)?;
        let profit = total_profit(&bits, inst)?;
        Ok(Solution {
            bits,
            weight,
            profit,
        })
    }

    pub(crate) fn from_parts(bits: Vec<bool>, weight: u64, profit: u64) -> Self {
        Solution {
            bits,
            weight,
            profit,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn profit(&self) -> u64 {
        self.profit
    }

    pub fn is_feasible(&self, inst: &KnapsackInstance) -> bool {
        inst.fits(self.weight)
    }

    /// True when no unselected item fits into the residual capacity.
    pub fn is_maximal(&self, inst: &KnapsackInstance) -> bool {
        self.bits
            .iter()
            .zip(inst.items())
            .all(|(&b, it)| b || !inst.fits(self.weight + it.weight))
    }

    /// Recomputes weight and profit from the bits and compares with the cache.
    pub fn cache_consistent(&self, inst: &KnapsackInstance) -> bool {
        total_weight(&self.bits, inst).ok() == Some(self.weight)
            && total_profit(&self.bits, inst).ok() == Some(self.profit)
    }
}

/// Maximum feasible profit.
pub fn dp_optimum(inst: &KnapsackInstance) -> Result<u64> {
    dp_optimal_selection(inst).map(|(best, _)| best)
}

/// Maximum feasible profit and one selection attaining it.
///
/// Classic 0/1 DP over the integer budget `floor(C)`, which loses nothing
/// because weights are integers.
pub fn dp_optimal_selection(inst: &KnapsackInstance) -> Result<(u64, Vec<bool>)> {
    let budget = inst.capacity_x2() / 2;
    let k = inst.len() as u64;
    // Items heavier than the budget can never be taken, so the table only
    // needs to span the largest useful budget.
    let useful = budget.min(inst.weight_sum());
    let cells = k.saturating_mul(useful.saturating_add(1));
    if cells > DP_CELL_LIMIT {
        return Err(Error::UnsupportedInstance(format!(
            "DP table of {cells} cells exceeds the limit of {DP_CELL_LIMIT}"
        )));
    }
    let width = useful as usize + 1;
    let mut best = vec![0u64; width];
    let mut take = vec![false; inst.len() * width];
    for (i, it) in inst.items().iter().enumerate() {
        let w = it.weight as usize;
        if w >= width {
            continue;
        }
        let row = &mut take[i * width..(i + 1) * width];
        for cap in (w..width).rev() {
            let with = best[cap - w] + it.profit;
            if with > best[cap] {
                best[cap] = with;
                row[cap] = true;
            }
        }
    }
    let mut bits = vec![false; inst.len()];
    let mut cap = width - 1;
    for i in (0..inst.len()).rev() {
        if take[i * width + cap] {
            bits[i] = true;
            cap -= inst.items()[i].weight as usize;
        }
    }
    Ok((best[width - 1], bits))
}

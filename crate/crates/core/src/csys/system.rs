use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use super::lc::{Lc, Variable, Visibility};
use super::CsError;
use crate::fieldcore::{sponge, Fe};

/// What a synthesis pass keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Record constraints; variable values are scratch and dropped at the end.
    Setup,
    /// Compute values only; constraints are counted but not stored.
    Prove,
    /// Keep both (gadget tests, debugging).
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub a: Lc,
    pub b: Lc,
    pub c: Lc,
}

/// Variable values: public prefix, witness suffix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub public: Vec<Fe>,
    pub witness: Vec<Fe>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.public.len() + self.witness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<Fe> {
        let mut v = self.public.clone();
        v.extend_from_slice(&self.witness);
        v
    }

    pub fn from_values(values: &[Fe], num_public: usize) -> Self {
        Self {
            public: values[..num_public.min(values.len())].to_vec(),
            witness: values[num_public.min(values.len())..].to_vec(),
        }
    }
}

pub struct ConstraintSystem {
    mode: Mode,
    public_values: Vec<Fe>,
    witness_values: Vec<Fe>,
    num_public: usize,
    num_witness: usize,
    constraints: Vec<Constraint>,
    region_log: Vec<u32>,
    region_names: Vec<String>,
    region_ids: HashMap<String, u32>,
    region_counts: Vec<usize>,
    stack: Vec<u32>,
    num_constraints: usize,
    digest: OnceLock<[u8; 32]>,
}

impl Default for ConstraintSystem {
    fn default() -> Self {
        Self::new(Mode::Full)
    }
}

impl std::fmt::Debug for ConstraintSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstraintSystem")
            .field("mode", &self.mode)
            .field("num_public", &self.num_public)
            .field("num_witness", &self.num_witness)
            .field("num_constraints", &self.num_constraints)
            .finish()
    }
}

impl ConstraintSystem {
    pub fn new(mode: Mode) -> Self {
        let mut cs = Self {
            mode,
            public_values: Vec::new(),
            witness_values: Vec::new(),
            num_public: 0,
            num_witness: 0,
            constraints: Vec::new(),
            region_log: Vec::new(),
            region_names: Vec::new(),
            region_ids: HashMap::new(),
            region_counts: Vec::new(),
            stack: Vec::new(),
            num_constraints: 0,
            digest: OnceLock::new(),
        };
        cs.region_id("");
        cs
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn stores_constraints(&self) -> bool {
        self.mode != Mode::Prove
    }

    fn region_id(&mut self, path: &str) -> u32 {
        if let Some(&id) = self.region_ids.get(path) {
            return id;
        }
        let id = self.region_names.len() as u32;
        self.region_names.push(path.to_string());
        self.region_ids.insert(path.to_string(), id);
        self.region_counts.push(0);
        id
    }

    fn current_region(&self) -> u32 {
        self.stack.last().copied().unwrap_or(0)
    }

    pub fn alloc(&mut self, visibility: Visibility, value: Fe) -> Variable {
        match visibility {
            Visibility::Public => {
                let v = Variable::public(self.num_public);
                self.num_public += 1;
                self.public_values.push(value);
                v
            }
            Visibility::Witness => {
                let v = Variable::witness(self.num_witness);
                self.num_witness += 1;
                self.witness_values.push(value);
                v
            }
        }
    }

    pub fn alloc_public(&mut self, value: Fe) -> Variable {
        self.alloc(Visibility::Public, value)
    }

    pub fn alloc_witness(&mut self, value: Fe) -> Variable {
        self.alloc(Visibility::Witness, value)
    }

    pub fn num_public(&self) -> usize {
        self.num_public
    }

    pub fn num_witness(&self) -> usize {
        self.num_witness
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_lc(&self, lc: &Lc) -> Result<(), CsError> {
        for (v, _) in lc.terms.iter() {
            let ok = if v.is_public() {
                v.index() < self.num_public
            } else {
                v.index() < self.num_witness
            };
            if !ok {
                return Err(CsError::UnallocatedVariable(*v));
            }
        }
        Ok(())
    }

    /// Adds A·B = C under the current region.
    pub fn enforce(&mut self, a: Lc, b: Lc, c: Lc) -> Result<(), CsError> {
        self.check_lc(&a)?;
        self.check_lc(&b)?;
        self.check_lc(&c)?;
        let region = self.current_region();
        self.region_counts[region as usize] += 1;
        self.num_constraints += 1;
        if self.stores_constraints() {
            self.constraints.push(Constraint {
                a: a.normalized(),
                b: b.normalized(),
                c: c.normalized(),
            });
            self.region_log.push(region);
        }
        Ok(())
    }

    /// lhs = rhs as a single linear constraint.
    pub fn enforce_equal(&mut self, lhs: Lc, rhs: Lc) -> Result<(), CsError> {
        self.enforce(lhs, Lc::one(), rhs)
    }

    pub fn enforce_zero(&mut self, lc: Lc) -> Result<(), CsError> {
        self.enforce(lc, Lc::one(), Lc::zero())
    }

    pub fn region<T>(&mut self, label: &str, body: impl FnOnce(&mut Self) -> T) -> T {
        let parent = self.current_region();
        let path = if parent == 0 {
            label.to_string()
        } else {
            format!("{}/{}", self.region_names[parent as usize], label)
        };
        let id = self.region_id(&path);
        self.stack.push(id);
        let out = body(self);
        self.stack.pop();
        out
    }

    pub fn current_region_path(&self) -> &str {
        &self.region_names[self.current_region() as usize]
    }

    pub fn value(&self, v: Variable) -> Fe {
        if v.is_public() {
            self.public_values[v.index()]
        } else {
            self.witness_values[v.index()]
        }
    }

    pub fn eval(&self, lc: &Lc) -> Fe {
        lc.eval(&self.public_values, &self.witness_values)
    }

    /// Constraint counts keyed by full region path ("" for unlabeled).
    pub fn stats(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (i, name) in self.region_names.iter().enumerate() {
            let n = self.region_counts[i];
            if n > 0 {
                m.insert(name.clone(), n);
            }
        }
        m
    }

    /// Constraints under a region path, including nested sub-regions.
    pub fn region_total(&self, prefix: &str) -> usize {
        let nested = format!("{prefix}/");
        self.region_names
            .iter()
            .enumerate()
            .filter(|(_, n)| n.as_str() == prefix || n.starts_with(&nested))
            .map(|(i, _)| self.region_counts[i])
            .sum()
    }

    /// Stats aggregated by top-level region.
    pub fn top_level_stats(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (i, name) in self.region_names.iter().enumerate() {
            let top = name.split('/').next().unwrap_or("").to_string();
            if self.region_counts[i] > 0 {
                *m.entry(top).or_insert(0) += self.region_counts[i];
            }
        }
        m
    }

    pub fn region_of(&self, index: usize) -> Option<&str> {
        self.region_log.get(index).map(|&id| self.region_names[id as usize].as_str())
    }

    /// Values computed during synthesis (meaningful in Prove and Full modes).
    pub fn assignment(&self) -> Assignment {
        Assignment {
            public: self.public_values.clone(),
            witness: self.witness_values.clone(),
        }
    }

    pub fn into_assignment(self) -> Assignment {
        Assignment { public: self.public_values, witness: self.witness_values }
    }

    /// Drops scratch values; used at the end of a setup pass.
    pub fn finish_setup(&mut self) {
        self.public_values = Vec::new();
        self.witness_values = Vec::new();
        self.mode = Mode::Setup;
    }

    pub fn satisfied(&self, z: &Assignment) -> Result<(), CsError> {
        if z.public.len() != self.num_public || z.witness.len() != self.num_witness {
            return Err(CsError::LengthMismatch {
                expected: self.num_public + self.num_witness,
                got: z.len(),
            });
        }
        if !self.stores_constraints() && self.num_constraints > 0 {
            return Err(CsError::NoConstraints);
        }
        for (i, con) in self.constraints.iter().enumerate() {
            let a = con.a.eval(&z.public, &z.witness);
            let b = con.b.eval(&z.public, &z.witness);
            let c = con.c.eval(&z.public, &z.witness);
            let ab = if a.is_zero() || b.is_zero() {
                Fe::ZERO
            } else if b.is_one() {
                a
            } else if a.is_one() {
                b
            } else {
                a * b
            };
            if ab != c {
                return Err(CsError::Violation {
                    index: i,
                    region: self.region_names[self.region_log[i] as usize].clone(),
                });
            }
        }
        Ok(())
    }

    /// Checks the values computed during a Full-mode synthesis.
    pub fn check_self(&self) -> Result<(), CsError> {
        self.satisfied(&self.assignment())
    }

    /// Canonical serialization: little-endian counts, then each constraint's
    /// A, B, C as (constant, term count, sorted (flat index, coefficient) terms).
    pub fn write_canonical(&self, sink: &mut impl FnMut(&[u8])) {
        sink(&(self.num_public as u64).to_le_bytes());
        sink(&(self.num_witness as u64).to_le_bytes());
        sink(&(self.constraints.len() as u64).to_le_bytes());
        let np = self.num_public;
        for con in self.constraints.iter() {
            for lc in [&con.a, &con.b, &con.c] {
                sink(&lc.constant.to_le_bytes());
                sink(&(lc.terms.len() as u32).to_le_bytes());
                let mut terms: Vec<(u32, Fe)> =
                    lc.terms.iter().map(|(v, c)| (v.flat_index(np) as u32, *c)).collect();
                terms.sort_unstable_by_key(|t| t.0);
                for (idx, c) in terms {
                    sink(&idx.to_le_bytes());
                    sink(&c.to_le_bytes());
                }
            }
        }
    }

    /// Sponge hash over the SHA-256 of the canonical serialization.
    pub fn digest(&self) -> [u8; 32] {
        *self.digest.get_or_init(|| {
            let mut h = Sha256::new();
            let mut buf: Vec<u8> = Vec::with_capacity(1 << 16);
            self.write_canonical(&mut |b: &[u8]| {
                buf.extend_from_slice(b);
                if buf.len() >= 1 << 16 {
                    h.update(&buf);
                    buf.clear();
                }
            });
            h.update(&buf);
            let d: [u8; 32] = h.finalize().into();
            let hi = Fe::from_be_bytes_mod_order(&d[..16]);
            let lo = Fe::from_be_bytes_mod_order(&d[16..]);
            sponge::hash(&[hi, lo], sponge::domain::SYSTEM_DIGEST).to_le_bytes()
        })
    }
}

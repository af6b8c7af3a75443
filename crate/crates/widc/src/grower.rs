//! Greedy committee growth driven by the partition criterion.
//!
//! The monomials built so far partition the sample: two examples share a
//! block iff they satisfy exactly the same monomials. The criterion is
//! Z = 2 * sum over blocks and classes of sqrt(W_in * W_out), where W_in is
//! the block's weight in the class and W_out the rest of the block. Monomials
//! are grown one literal at a time, always taking the literal that lowers Z
//! the most, and the committee stops when no new monomial lowers Z anymore.
//! Example weights are never modified during induction.

use std::collections::HashMap;
use std::rc::Rc;

use crate::committee::{Literal, Monomial, Sample};
use crate::error::{Error, Result};

/// A step only counts as a decrease when it beats the previous Z by this
/// margin; keeps float noise from producing livelock or phantom progress.
pub const Z_DECREASE_EPS: f64 = 1e-12;

const TALLY_TOL: f64 = 1e-9;

/// Caps on committee growth.
#[derive(Clone, Copy, Debug)]
pub struct GrowLimits {
    pub max_rules: usize,
    pub max_literals: usize,
}

impl Default for GrowLimits {
    fn default() -> Self {
        Self {
            max_rules: 256,
            max_literals: 32,
        }
    }
}

/// One accepted literal addition.
#[derive(Clone, Debug)]
pub struct GrowStep {
    pub monomial_index: usize,
    pub literal: Literal,
    pub z: f64,
}

/// Record of a committee growth run.
#[derive(Clone, Debug, Default)]
pub struct GrowTrace {
    /// Z of the partition before any monomial exists.
    pub initial_z: f64,
    /// Every accepted literal addition, in order.
    pub literal_steps: Vec<GrowStep>,
    /// Z after each accepted monomial; strictly decreasing.
    pub committee_z: Vec<f64>,
}

impl GrowTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("monomial_index,literal,z\n");
        for s in &self.literal_steps {
            out.push_str(&format!("{},{},{}\n", s.monomial_index, s.literal, s.z));
        }
        out
    }
}

type Sig = Vec<u64>;

fn sig_with_bit(sig: &Sig, bit: usize) -> Sig {
    let mut out = sig.clone();
    let block = bit / 64;
    if out.len() <= block {
        out.resize(block + 1, 0);
    }
    out[block] |= 1 << (bit % 64);
    out
}

fn sig_without_bit(sig: &Sig, bit: usize) -> Sig {
    let mut out = sig.clone();
    out[bit / 64] &= !(1 << (bit % 64));
    out
}

fn sig_has_bit(sig: &Sig, bit: usize) -> bool {
    sig.get(bit / 64).is_some_and(|b| b >> (bit % 64) & 1 == 1)
}

#[derive(Clone, Debug)]
struct Group {
    sig: Sig,
    class_w: Vec<f64>,
    /// Number of member examples touching each class; a zero count pins the
    /// weight to exactly zero so incremental float residue cannot survive.
    class_n: Vec<u32>,
    members: Vec<u32>,
}

impl Group {
    fn term(&self) -> Result<f64> {
        term_of(&self.class_w)
    }
}

/// 2 * sum over classes of sqrt(W_in * W_out); tiny negative residues from
/// incremental updates are clamped, real ones are bugs.
fn term_of(class_w: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &w in class_w {
        total += clamped(w)?;
    }
    let mut sum = 0.0;
    for &w in class_w {
        let w_in = clamped(w)?;
        let w_out = clamped(total - w_in)?;
        sum += (w_in * w_out).sqrt();
    }
    Ok(2.0 * sum)
}

fn clamped(w: f64) -> Result<f64> {
    if w < -TALLY_TOL {
        return Err(Error::Inconsistency(format!("negative tally {w}")));
    }
    Ok(w.max(0.0))
}

/// The partition of a sample induced by a set of monomials, with per-block
/// class-weight tallies. Blocks are keyed by the signature of monomials an
/// example satisfies. Multilabel weight is split evenly over the example's
/// classes, matching the single-label transform used everywhere else.
#[derive(Clone)]
pub struct PartitionState<'a> {
    sample: &'a Sample,
    monomials: Vec<Monomial>,
    groups: Vec<Group>,
    sig_index: HashMap<Sig, usize>,
    contrib: Rc<Vec<Vec<(usize, f64)>>>,
}

impl<'a> PartitionState<'a> {
    pub fn from_sample(sample: &'a Sample, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            if m.n() != sample.n() {
                return Err(Error::DimensionMismatch {
                    expected: sample.n(),
                    got: m.n(),
                });
            }
        }
        let contrib: Vec<Vec<(usize, f64)>> = sample
            .examples()
            .iter()
            .map(|e| {
                let share = e.weight() / e.class_count() as f64;
                e.classes().ones().map(|cls| (cls, share)).collect()
            })
            .collect();
        let blocks = monomials.len().div_ceil(64);
        let mut state = Self {
            sample,
            monomials,
            groups: Vec::new(),
            sig_index: HashMap::new(),
            contrib: Rc::new(contrib),
        };
        for (idx, e) in sample.examples().iter().enumerate() {
            let mut sig = vec![0u64; blocks];
            for (mi, m) in state.monomials.iter().enumerate() {
                if m.matches(e.observation()) {
                    sig[mi / 64] |= 1 << (mi % 64);
                }
            }
            let gi = state.group_for(sig);
            state.add_example_to_group(gi, idx as u32);
        }
        Ok(state)
    }

    fn group_for(&mut self, sig: Sig) -> usize {
        if let Some(&gi) = self.sig_index.get(&sig) {
            return gi;
        }
        let gi = self.groups.len();
        self.sig_index.insert(sig.clone(), gi);
        self.groups.push(Group {
            sig,
            class_w: vec![0.0; self.sample.c()],
            class_n: vec![0; self.sample.c()],
            members: Vec::new(),
        });
        gi
    }

    fn add_example_to_group(&mut self, gi: usize, idx: u32) {
        let g = &mut self.groups[gi];
        g.members.push(idx);
        for &(cls, w) in &self.contrib[idx as usize] {
            g.class_w[cls] += w;
            g.class_n[cls] += 1;
        }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    /// Number of non-empty partition blocks.
    pub fn group_count(&self) -> usize {
        self.groups.iter().filter(|g| !g.members.is_empty()).count()
    }

    /// The partition criterion Z of the current state.
    pub fn z(&self) -> Result<f64> {
        let mut z = 0.0;
        for g in &self.groups {
            if !g.members.is_empty() {
                z += g.term()?;
            }
        }
        Ok(z)
    }

    fn literal_holds(&self, example: u32, lit: Literal) -> bool {
        let bit = self.sample.examples()[example as usize]
            .observation()
            .get(lit.var);
        bit == lit.positive
    }

    /// Weight and member count per class of the members of `gi` that fail
    /// the literal, plus the leaving and staying member lists.
    fn leavers(&self, gi: usize, lit: Literal) -> (Vec<f64>, Vec<u32>, Vec<u32>, Vec<u32>) {
        let mut w = vec![0.0; self.sample.c()];
        let mut n = vec![0u32; self.sample.c()];
        let mut leave = Vec::new();
        let mut stay = Vec::new();
        for &e in &self.groups[gi].members {
            if self.literal_holds(e, lit) {
                stay.push(e);
            } else {
                leave.push(e);
                for &(cls, share) in &self.contrib[e as usize] {
                    w[cls] += share;
                    n[cls] += 1;
                }
            }
        }
        (w, n, leave, stay)
    }

    fn check_refine_preconditions(&self, monomial_index: usize, lit: Literal) -> Result<()> {
        if monomial_index >= self.monomials.len() {
            return Err(Error::precondition(format!(
                "monomial index {monomial_index} out of range"
            )));
        }
        if lit.var >= self.sample.n() {
            return Err(Error::DimensionMismatch {
                expected: self.sample.n(),
                got: lit.var,
            });
        }
        if self.monomials[monomial_index].has_variable(lit.var) {
            return Err(Error::VariableAlreadyBound(lit.var));
        }
        Ok(())
    }

    /// The Z the partition would have after specializing the indexed monomial
    /// with the literal, computed without materializing the new state.
    pub fn z_if_refined(&self, monomial_index: usize, lit: Literal) -> Result<f64> {
        self.check_refine_preconditions(monomial_index, lit)?;
        let mut removed: Vec<Option<(Vec<f64>, Vec<u32>)>> = vec![None; self.groups.len()];
        let mut received: Vec<Option<Vec<f64>>> = vec![None; self.groups.len()];
        let mut created: Vec<Vec<f64>> = Vec::new();
        for gi in 0..self.groups.len() {
            if self.groups[gi].members.is_empty() || !sig_has_bit(&self.groups[gi].sig, monomial_index)
            {
                continue;
            }
            let (leave_w, leave_n, leave_idx, _) = self.leavers(gi, lit);
            if leave_idx.is_empty() {
                continue;
            }
            let target = sig_without_bit(&self.groups[gi].sig, monomial_index);
            match self.sig_index.get(&target) {
                Some(&ti) => received[ti] = Some(leave_w.clone()),
                None => created.push(leave_w.clone()),
            }
            removed[gi] = Some((leave_w, leave_n));
        }
        let mut z = 0.0;
        let c = self.sample.c();
        let mut scratch = vec![0.0; c];
        for gi in 0..self.groups.len() {
            let g = &self.groups[gi];
            match (&removed[gi], &received[gi]) {
                (None, None) => {
                    if !g.members.is_empty() {
                        z += g.term()?;
                    }
                }
                (rem, rec) => {
                    scratch.copy_from_slice(&g.class_w);
                    if let Some((rw, rn)) = rem {
                        for cls in 0..c {
                            scratch[cls] -= rw[cls];
                            if g.class_n[cls] == rn[cls] {
                                scratch[cls] = 0.0;
                            }
                        }
                    }
                    if let Some(aw) = rec {
                        for (slot, w) in scratch.iter_mut().zip(aw) {
                            *slot += w;
                        }
                    }
                    z += term_of(&scratch)?;
                }
            }
        }
        for lw in &created {
            z += term_of(lw)?;
        }
        Ok(z)
    }

    /// A new state where the indexed monomial has been specialized by the
    /// literal; examples no longer satisfying it move to the block matching
    /// their reduced signature.
    pub fn refine_with_literal(&self, monomial_index: usize, lit: Literal) -> Result<Self> {
        self.check_refine_preconditions(monomial_index, lit)?;
        let mut next = self.clone();
        next.monomials[monomial_index] = next.monomials[monomial_index].with_literal(lit)?;
        for gi in 0..next.groups.len() {
            if next.groups[gi].members.is_empty()
                || !sig_has_bit(&next.groups[gi].sig, monomial_index)
            {
                continue;
            }
            let (leave_w, leave_n, leave_idx, stay_idx) = next.leavers(gi, lit);
            if leave_idx.is_empty() {
                continue;
            }
            let target_sig = sig_without_bit(&next.groups[gi].sig, monomial_index);
            let ti = next.group_for(target_sig);
            {
                let g = &mut next.groups[gi];
                g.members = stay_idx;
                for cls in 0..leave_w.len() {
                    g.class_w[cls] -= leave_w[cls];
                    g.class_n[cls] -= leave_n[cls];
                    if g.class_n[cls] == 0 {
                        // exact zero instead of float residue
                        g.class_w[cls] = 0.0;
                    }
                }
            }
            {
                let t = &mut next.groups[ti];
                t.members.extend_from_slice(&leave_idx);
                for cls in 0..leave_w.len() {
                    t.class_w[cls] += leave_w[cls];
                    t.class_n[cls] += leave_n[cls];
                }
            }
        }
        Ok(next)
    }

    /// Appends a fresh empty monomial; every example satisfies it, so the
    /// partition blocks are unchanged apart from their signatures.
    fn push_empty_monomial(&mut self) {
        let bit = self.monomials.len();
        self.monomials.push(Monomial::empty(self.sample.n()));
        self.sig_index.clear();
        for (gi, g) in self.groups.iter_mut().enumerate() {
            g.sig = sig_with_bit(&g.sig, bit);
            self.sig_index.insert(g.sig.clone(), gi);
        }
    }

    /// Removes the trailing monomial; it must still be the empty conjunction.
    fn pop_empty_monomial(&mut self) {
        let bit = self.monomials.len() - 1;
        assert!(
            self.monomials[bit].is_empty_conjunction(),
            "only an unrefined monomial can be popped"
        );
        self.monomials.pop();
        self.sig_index.clear();
        for (gi, g) in self.groups.iter_mut().enumerate() {
            g.sig = sig_without_bit(&g.sig, bit);
            self.sig_index.insert(g.sig.clone(), gi);
        }
    }

    fn into_monomials(self) -> Vec<Monomial> {
        self.monomials
    }
}

/// The partition criterion of a state (Eq-style entry point used by tests
/// and traces; identical to `state.z()`).
pub fn partition_z(state: &PartitionState<'_>) -> Result<f64> {
    state.z()
}

/// Grows one monomial on top of the state: starts from the empty conjunction
/// and repeatedly adds the Z-minimizing literal among all candidates whose
/// result is not already in the committee, stopping when no addition
/// decreases Z. Returns the final Z, or None when nothing was accepted (the
/// monomial is then discarded).
fn grow_one_monomial(
    state: &mut PartitionState<'_>,
    max_literals: usize,
    steps: &mut Vec<GrowStep>,
) -> Result<Option<f64>> {
    let base_z = state.z()?;
    state.push_empty_monomial();
    let m = state.monomial_count() - 1;
    let n = state.sample.n();
    let mut cur_z = base_z;
    let mut accepted = 0usize;
    while accepted < max_literals {
        let mut best: Option<(f64, Literal)> = None;
        for var in 0..n {
            if state.monomials[m].has_variable(var) {
                continue;
            }
            for positive in [true, false] {
                let lit = Literal { var, positive };
                let candidate = state.monomials[m].with_literal(lit)?;
                let duplicate = state
                    .monomials
                    .iter()
                    .enumerate()
                    .any(|(i, existing)| i != m && *existing == candidate);
                if duplicate {
                    continue;
                }
                let z_new = state.z_if_refined(m, lit)?;
                // ties (within eps) keep the earliest candidate: lowest
                // variable index, positive before negative
                let improves = match best {
                    None => true,
                    Some((bz, _)) => z_new < bz - Z_DECREASE_EPS,
                };
                if improves {
                    best = Some((z_new, lit));
                }
            }
        }
        match best {
            Some((z_new, lit)) if z_new < cur_z - Z_DECREASE_EPS => {
                *state = state.refine_with_literal(m, lit)?;
                cur_z = state.z()?;
                accepted += 1;
                steps.push(GrowStep {
                    monomial_index: m,
                    literal: lit,
                    z: cur_z,
                });
            }
            _ => break,
        }
    }
    if accepted == 0 {
        state.pop_empty_monomial();
        return Ok(None);
    }
    Ok(Some(cur_z))
}

/// Grows a single monomial against an existing committee; None when no
/// monomial can strictly decrease Z.
pub fn grow_monomial(
    sample: &Sample,
    existing: &[Monomial],
    max_literals: usize,
) -> Result<Option<Monomial>> {
    let mut state = PartitionState::from_sample(sample, existing.to_vec())?;
    let mut steps = Vec::new();
    Ok(grow_one_monomial(&mut state, max_literals, &mut steps)?
        .map(|_| state.monomials.last().expect("grown monomial").clone()))
}

/// Grows the full unpruned committee. Vote vectors are not assigned here.
/// The trace records every accepted literal and the strictly decreasing Z
/// after each accepted monomial.
pub fn grow_committee(sample: &Sample, limits: &GrowLimits) -> Result<(Vec<Monomial>, GrowTrace)> {
    let mut state = PartitionState::from_sample(sample, Vec::new())?;
    let mut trace = GrowTrace {
        initial_z: state.z()?,
        ..GrowTrace::default()
    };
    while state.monomial_count() < limits.max_rules {
        match grow_one_monomial(&mut state, limits.max_literals, &mut trace.literal_steps)? {
            Some(z) => trace.committee_z.push(z),
            None => break,
        }
    }
    Ok((state.into_monomials(), trace))
}

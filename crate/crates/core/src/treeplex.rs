//! Sequence-form decision sets.
//!
//! A [`Treeplex`] is a forest of information sets. Every information set `h`
//! owns a contiguous block `Ω_h` of sequence indices and hangs below a parent
//! sequence `σ(h)`, or below the virtual root (`parent == None`, whose mass is
//! fixed at 1). The virtual root has no coordinate of its own.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::simplex;
use crate::{Error, Result};

/// Construction input for one information set. Blocks are laid out in the
/// order the specs are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSetSpec {
    pub parent: Option<usize>,
    pub num_actions: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoSet {
    pub id: usize,
    pub parent: Option<usize>,
    pub start: usize,
    pub len: usize,
    pub label: String,
}

impl InfoSet {
    pub fn indices(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

/// Per-infoset behavioral strategy stored flat: `q[i]` is the conditional
/// probability of sequence `i` within its own information set.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralStrategy {
    pub q: Vec<f64>,
    /// Information sets whose parent mass was zero; their `q` block was set
    /// to uniform.
    pub zero_parent: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `Σ_{i∈Ω_h} z_i − z_{σ(h)}` exceeds the tolerance.
    Flow {
        infoset: usize,
        residual: f64,
    },
    Negative {
        index: usize,
        value: f64,
    },
    /// Conditional probability below the perturbation floor.
    BelowFloor {
        index: usize,
        q: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Treeplex {
    infosets: Vec<InfoSet>,
    dim: usize,
    /// Leaf-to-root: every child information set precedes its parent's.
    topo: Vec<usize>,
    owner: Vec<usize>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    max_actions: usize,
}

impl Treeplex {
    pub fn new(specs: Vec<InfoSetSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Treeplex("no information sets".into()));
        }
        let mut infosets = Vec::with_capacity(specs.len());
        let mut start = 0;
        for (id, spec) in specs.into_iter().enumerate() {
            if spec.num_actions == 0 {
                return Err(Error::Treeplex(format!(
                    "information set {id} has no actions"
                )));
            }
            infosets.push(InfoSet {
                id,
                parent: spec.parent,
                start,
                len: spec.num_actions,
                label: spec.label,
            });
            start += spec.num_actions;
        }
        let dim = start;

        let mut owner = vec![0; dim];
        for h in &infosets {
            owner[h.indices()].iter_mut().for_each(|o| *o = h.id);
        }
        let mut children = vec![Vec::new(); dim];
        let mut roots = Vec::new();
        for h in &infosets {
            match h.parent {
                None => roots.push(h.id),
                Some(p) if p < dim => children[p].push(h.id),
                Some(p) => {
                    return Err(Error::Treeplex(format!(
                        "information set {} has parent sequence {p} outside 0..{dim}",
                        h.id
                    )))
                }
            }
        }
        if roots.is_empty() {
            return Err(Error::Treeplex(
                "no information set hangs below the root".into(),
            ));
        }

        // Depth by walking parent chains; a chain longer than the number of
        // information sets means a cycle.
        let n = infosets.len();
        let mut depth = vec![usize::MAX; n];
        for h in 0..n {
            let mut chain = Vec::new();
            let mut cur = h;
            // depth of the first chain element from the top
            let mut d = loop {
                if depth[cur] != usize::MAX {
                    break depth[cur] + 1;
                }
                chain.push(cur);
                if chain.len() > n {
                    return Err(Error::Treeplex(format!(
                        "parent cycle through information set {h}"
                    )));
                }
                match infosets[cur].parent {
                    None => break 0,
                    Some(p) => cur = owner[p],
                }
            };
            for &c in chain.iter().rev() {
                depth[c] = d;
                d += 1;
            }
        }
        let mut topo: Vec<usize> = (0..n).collect();
        topo.sort_by(|a, b| depth[*b].cmp(&depth[*a]).then(a.cmp(b)));
        let max_actions = infosets.iter().map(|h| h.len).max().unwrap_or(0);

        Ok(Self {
            infosets,
            dim,
            topo,
            owner,
            children,
            roots,
            max_actions,
        })
    }

    /// A treeplex consisting of one simplex with `n` actions.
    pub fn simplex(n: usize) -> Result<Self> {
        Self::new(vec![InfoSetSpec {
            parent: None,
            num_actions: n,
            label: "root".into(),
        }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn infosets(&self) -> &[InfoSet] {
        &self.infosets
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// `h(i)`.
    pub fn owner(&self, index: usize) -> usize {
        self.owner[index]
    }

    /// `H_i`: information sets whose parent is sequence `index`.
    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// `C_Ω`.
    pub fn max_actions(&self) -> usize {
        self.max_actions
    }

    pub fn specs(&self) -> Vec<InfoSetSpec> {
        self.infosets
            .iter()
            .map(|h| InfoSetSpec {
                parent: h.parent,
                num_actions: h.len,
                label: h.label.clone(),
            })
            .collect()
    }

    /// Mass of the parent of `h` in `z` (1 at the virtual root).
    #[inline]
    pub fn parent_mass(&self, h: usize, z: &[f64]) -> f64 {
        self.infosets[h].parent.map_or(1.0, |p| z[p])
    }

    pub fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn check_gamma(&self, gamma: f64) -> Result<()> {
        if !(gamma >= 0.0) || gamma * self.max_actions as f64 >= 1.0 {
            return Err(Error::InfeasibleGamma {
                gamma,
                actions: self.max_actions,
            });
        }
        Ok(())
    }

    pub fn validate(&self, z: &[f64], gamma: f64, tol: f64) -> Result<ValidationReport> {
        self.check_dim(z)?;
        let mut report = ValidationReport::default();
        for (index, &value) in z.iter().enumerate() {
            if !(value >= -tol) {
                report.violations.push(Violation::Negative { index, value });
            }
        }
        for h in &self.infosets {
            let parent = self.parent_mass(h.id, z);
            let mass: f64 = z[h.indices()].iter().sum();
            let residual = mass - parent;
            if !(residual.abs() <= tol) {
                report.violations.push(Violation::Flow {
                    infoset: h.id,
                    residual,
                });
            }
            if gamma > 0.0 && parent > tol {
                for i in h.indices() {
                    let q = z[i] / parent;
                    if q < gamma - tol {
                        report
                            .violations
                            .push(Violation::BelowFloor { index: i, q });
                    }
                }
            }
        }
        Ok(report)
    }

    /// `z_i = q_i · z_{σ(h(i))}`, computed root to leaf.
    pub fn behavioral_to_sequence(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(q)?;
        let mut z = vec![0.0; self.dim];
        self.behavioral_into(q, &mut z);
        Ok(z)
    }

    pub(crate) fn behavioral_into(&self, q: &[f64], z: &mut [f64]) {
        for &h in self.topo.iter().rev() {
            let info = &self.infosets[h];
            let parent = info.parent.map_or(1.0, |p| z[p]);
            for i in info.indices() {
                z[i] = q[i] * parent;
            }
        }
    }

    /// `q_i = z_i / z_{σ(h(i))}`; blocks with zero parent mass become uniform.
    pub fn sequence_to_behavioral(&self, z: &[f64]) -> Result<BehavioralStrategy> {
        self.check_dim(z)?;
        let mut q = vec![0.0; self.dim];
        let mut zero_parent = Vec::new();
        for h in &self.infosets {
            let parent = self.parent_mass(h.id, z);
            if parent > 0.0 {
                for i in h.indices() {
                    q[i] = z[i] / parent;
                }
            } else {
                let u = 1.0 / h.len as f64;
                q[h.indices()].iter_mut().for_each(|x| *x = u);
                zero_parent.push(h.id);
            }
        }
        Ok(BehavioralStrategy { q, zero_parent })
    }

    pub fn uniform_behavioral(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.dim];
        for h in &self.infosets {
            let u = 1.0 / h.len as f64;
            q[h.indices()].iter_mut().for_each(|x| *x = u);
        }
        q
    }

    pub fn uniform_strategy(&self) -> Vec<f64> {
        let q = self.uniform_behavioral();
        let mut z = vec![0.0; self.dim];
        self.behavioral_into(&q, &mut z);
        z
    }

    /// Leaf-to-root dynamic program shared by every per-infoset decomposable
    /// optimization over the treeplex.
    ///
    /// `local(h, cont, q)` receives, for each action of `h`, the summed optimal
    /// values of the child information sets below that action, writes the
    /// local optimizer into `q`, and returns the local optimal value
    /// (including `cont`). Returns the sum of root values and the optimizer
    /// in sequence form.
    pub(crate) fn solve_dilated<F>(&self, mut local: F) -> Result<(f64, Vec<f64>)>
    where
        F: FnMut(usize, &[f64], &mut [f64]) -> Result<f64>,
    {
        let mut values = vec![0.0; self.infosets.len()];
        let mut q = vec![0.0; self.dim];
        let mut cont = Vec::with_capacity(self.max_actions);
        for &h in &self.topo {
            let info = &self.infosets[h];
            cont.clear();
            cont.extend(
                info.indices()
                    .map(|i| self.children[i].iter().map(|&c| values[c]).sum::<f64>()),
            );
            values[h] = local(h, &cont, &mut q[info.indices()])?;
        }
        let total = self.roots.iter().map(|&h| values[h]).sum();
        let mut z = vec![0.0; self.dim];
        self.behavioral_into(&q, &mut z);
        Ok((total, z))
    }

    /// Optimizes `⟨g, z⟩` over the γ-perturbed treeplex. Ties go to the
    /// lowest index.
    pub fn best_response(&self, g: &[f64], gamma: f64, sense: Sense) -> Result<(f64, Vec<f64>)> {
        self.check_dim(g)?;
        self.check_gamma(gamma)?;
        let maximize = sense == Sense::Max;
        let mut v = Vec::with_capacity(self.max_actions);
        self.solve_dilated(|h, cont, q| {
            let info = &self.infosets[h];
            v.clear();
            v.extend(info.indices().zip(cont).map(|(i, c)| g[i] + c));
            Ok(simplex::linear_opt(&v, gamma, maximize, q))
        })
    }
}

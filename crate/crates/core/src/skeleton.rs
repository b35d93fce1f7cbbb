//! Kinematic tree with static bone offsets.
//!
//! A [`Skeleton`] is the joint definition every motion is fitted to: joint
//! names, a parent per joint (exactly one root), the rest-pose length of
//! the bone ending at each joint, and the subset of joints used when
//! reporting errors.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Vec3;

/// A single frame of joint positions in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub joints: Vec<Vec3>,
}

impl Pose {
    pub fn new(joints: Vec<Vec3>) -> Self {
        Self { joints }
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.joints.iter().flatten().all(|v| v.is_finite())
    }
}

/// A validated kinematic tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    names: Vec<String>,
    parents: Vec<Option<usize>>,
    offsets: Vec<f64>,
    eval_subset: Vec<usize>,
    root: usize,
    order: Vec<(usize, usize)>,
}

/// Checks the tree invariants on raw parts and returns the root index.
///
/// The first violated invariant is reported, checked in this order: array
/// lengths, parent ranges, cycles, root count, offsets, evaluation subset.
pub fn validate_parts(
    names_len: usize,
    parents: &[Option<usize>],
    offsets: &[f64],
    eval_subset: &[usize],
) -> Result<usize> {
    let n = parents.len();
    if names_len != n || offsets.len() != n {
        return Err(Error::NameCountMismatch);
    }
    if n == 0 {
        return Err(Error::NoRoot);
    }
    for (joint, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            if p >= n {
                return Err(Error::InvalidParent {
                    joint,
                    parent: p as isize,
                });
            }
        }
    }
    // Walking up from any joint must hit the root within n steps.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while let Some(p) = parents[cur] {
            cur = p;
            steps += 1;
            if steps > n {
                return Err(Error::CycleDetected { joint: start });
            }
        }
    }
    let mut roots = parents
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_none())
        .map(|(j, _)| j);
    let root = roots.next().ok_or(Error::NoRoot)?;
    if let Some(second) = roots.next() {
        return Err(Error::MultipleRoots { first: root, second });
    }
    for (joint, &offset) in offsets.iter().enumerate() {
        if joint == root {
            if offset != 0.0 {
                return Err(Error::RootOffsetNotZero { offset });
            }
        } else if !(offset > 0.0 && offset.is_finite()) {
            return Err(Error::NonPositiveOffset { joint, offset });
        }
    }
    if eval_subset.is_empty() {
        return Err(Error::EmptyEvalSubset);
    }
    let mut seen = vec![false; n];
    for &joint in eval_subset {
        if joint >= n || seen[joint] {
            return Err(Error::EvalSubsetInvalid { joint });
        }
        seen[joint] = true;
    }
    Ok(root)
}

impl Skeleton {
    pub fn new(
        names: Vec<String>,
        parents: Vec<Option<usize>>,
        offsets: Vec<f64>,
        eval_subset: Vec<usize>,
    ) -> Result<Self> {
        let root = validate_parts(names.len(), &parents, &offsets, &eval_subset)?;
        let order = bfs_order(&parents, root);
        Ok(Self {
            names,
            parents,
            offsets,
            eval_subset,
            root,
            order,
        })
    }

    /// Builds a skeleton from parent indices using `-1` as the root
    /// sentinel, naming joints `j0, j1, ...` and evaluating every joint.
    pub fn from_parent_indices(parents: &[isize], offsets: Vec<f64>) -> Result<Self> {
        let mut ps = Vec::with_capacity(parents.len());
        for (joint, &p) in parents.iter().enumerate() {
            ps.push(match p {
                -1 => None,
                p if p >= 0 => Some(p as usize),
                p => return Err(Error::InvalidParent { joint, parent: p }),
            });
        }
        let names = (0..parents.len()).map(|j| alloc::format!("j{j}")).collect();
        let subset = (0..parents.len()).collect();
        Self::new(names, ps, offsets, subset)
    }

    /// Re-checks every invariant. Always `Ok` for a skeleton obtained from
    /// [`Skeleton::new`].
    pub fn validate(&self) -> Result<()> {
        validate_parts(
            self.names.len(),
            &self.parents,
            &self.offsets,
            &self.eval_subset,
        )
        .map(|_| ())
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn eval_subset(&self) -> &[usize] {
        &self.eval_subset
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Bones as `(parent, child)` pairs in breadth-first order from the
    /// root, siblings by ascending joint index.
    pub fn traversal_order(&self) -> &[(usize, usize)] {
        &self.order
    }

    /// Returns a copy with every offset multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for o in out.offsets.iter_mut() {
            *o *= factor;
        }
        out
    }

    /// Replaces the bone offsets, indexed by child joint.
    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Result<Self> {
        validate_parts(self.names.len(), &self.parents, &offsets, &self.eval_subset)?;
        self.offsets = offsets;
        Ok(self)
    }

    /// Replaces the evaluation subset.
    pub fn with_eval_subset(mut self, subset: Vec<usize>) -> Result<Self> {
        validate_parts(self.names.len(), &self.parents, &self.offsets, &subset)?;
        self.eval_subset = subset;
        Ok(self)
    }

    /// The default 17-joint humanoid (pelvis root, legs, spine, head, arms)
    /// with offsets in millimeters. Errors are reported over the 16
    /// non-root joints.
    pub fn humanoid() -> Self {
        const JOINTS: [(&str, isize, f64); 17] = [
            ("pelvis", -1, 0.0),
            ("r_hip", 0, 130.0),
            ("r_knee", 1, 450.0),
            ("r_ankle", 2, 450.0),
            ("l_hip", 0, 130.0),
            ("l_knee", 4, 450.0),
            ("l_ankle", 5, 450.0),
            ("spine", 0, 230.0),
            ("thorax", 7, 250.0),
            ("neck", 8, 100.0),
            ("head", 9, 115.0),
            ("l_shoulder", 8, 150.0),
            ("l_elbow", 11, 280.0),
            ("l_wrist", 12, 250.0),
            ("r_shoulder", 8, 150.0),
            ("r_elbow", 14, 280.0),
            ("r_wrist", 15, 250.0),
        ];
        let names = JOINTS.iter().map(|j| j.0.to_string()).collect();
        let parents = JOINTS
            .iter()
            .map(|j| if j.1 < 0 { None } else { Some(j.1 as usize) })
            .collect();
        let offsets = JOINTS.iter().map(|j| j.2).collect();
        Self::new(names, parents, offsets, (1..17).collect()).expect("humanoid is valid")
    }
}

fn bfs_order(parents: &[Option<usize>], root: usize) -> Vec<(usize, usize)> {
    let n = parents.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            // j ascends, so each child list is already sorted
            children[p].push(j);
        }
    }
    let mut order = Vec::with_capacity(n.saturating_sub(1));
    let mut queue = VecDeque::from([root]);
    while let Some(p) = queue.pop_front() {
        for &c in &children[p] {
            order.push((p, c));
            queue.push_back(c);
        }
    }
    order
}

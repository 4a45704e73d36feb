//! Fixed-height append-only merkle accumulator with zero padding and a full
//! root history.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::{FieldElement, HashParams};

pub const MAX_HEIGHT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MerkleError {
    #[error("tree height {0} outside 1..={MAX_HEIGHT}")]
    HeightOutOfRange(usize),
    #[error("leaf index {index} out of bounds for {leaf_count} leaves")]
    IndexOutOfBounds { index: usize, leaf_count: usize },
}

/// One entry of the root history. `leaf_count == 0` is the empty tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootEntry {
    pub leaf_count: usize,
    pub root: FieldElement,
}

impl RootEntry {
    /// Index of the last leaf covered by this root, `-1` for the empty tree.
    pub fn index(&self) -> i64 {
        self.leaf_count as i64 - 1
    }
}

/// Authentication path from a leaf to a root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub leaf_index: usize,
    pub siblings: Vec<FieldElement>,
    /// `false` when the running node is a left child.
    pub directions: Vec<bool>,
}

impl MerklePath {
    /// Builds a path with directions derived from the bits of `leaf_index`.
    pub fn from_index(leaf_index: usize, siblings: Vec<FieldElement>) -> Self {
        let directions = (0..siblings.len()).map(|i| (leaf_index >> i) & 1 == 1).collect();
        Self { leaf_index, siblings, directions }
    }

    pub fn height(&self) -> usize {
        self.siblings.len()
    }

    /// Folds `leaf` up the path. Only `siblings` and `directions` are used.
    pub fn fold(&self, leaf: FieldElement, params: &HashParams) -> FieldElement {
        self.siblings
            .iter()
            .zip(&self.directions)
            .fold(leaf, |node, (&sibling, &is_right)| {
                if is_right {
                    params.hash2(sibling, node)
                } else {
                    params.hash2(node, sibling)
                }
            })
    }
}

/// The accumulator. Mutation is single-writer; `&mut self` enforces it.
#[derive(Debug, Clone)]
pub struct MerkleTree {
    height: usize,
    params: Arc<HashParams>,
    /// `levels[0]` are the leaves; `levels[i]` holds every node at level `i`
    /// whose subtree contains at least one leaf.
    levels: Vec<Vec<FieldElement>>,
    zeros: Vec<FieldElement>,
    root_history: Vec<RootEntry>,
}

/// `Z_0 = 0`, `Z_{i+1} = hash2(Z_i, Z_i)`, for `i in 0..=height`.
pub fn zero_subtree_roots(height: usize, params: &HashParams) -> Vec<FieldElement> {
    let mut zeros = Vec::with_capacity(height + 1);
    zeros.push(FieldElement::ZERO);
    for i in 0..height {
        zeros.push(params.hash2(zeros[i], zeros[i]));
    }
    zeros
}

impl MerkleTree {
    pub fn new(height: usize) -> Result<Self, MerkleError> {
        Self::with_params(height, HashParams::standard())
    }

    pub fn with_params(height: usize, params: Arc<HashParams>) -> Result<Self, MerkleError> {
        if !(1..=MAX_HEIGHT).contains(&height) {
            return Err(MerkleError::HeightOutOfRange(height));
        }
        let zeros = zero_subtree_roots(height, &params);
        let empty = RootEntry { leaf_count: 0, root: zeros[height] };
        Ok(Self {
            height,
            params,
            levels: vec![Vec::new(); height],
            zeros,
            root_history: vec![empty],
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn params(&self) -> &Arc<HashParams> {
        &self.params
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.height
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() as u64 >= self.capacity()
    }

    pub fn leaves(&self) -> &[FieldElement] {
        &self.levels[0]
    }

    pub fn zero_subtree_roots(&self) -> &[FieldElement] {
        &self.zeros
    }

    pub fn empty_root(&self) -> FieldElement {
        self.zeros[self.height]
    }

    pub fn root(&self) -> FieldElement {
        self.root_history.last().expect("history never empty").root
    }

    pub fn root_history(&self) -> &[RootEntry] {
        &self.root_history
    }

    /// Appends a leaf. Returns `false` (and changes nothing) when full.
    pub fn add(&mut self, leaf: FieldElement) -> bool {
        if self.is_full() {
            return false;
        }
        let mut index = self.len();
        self.levels[0].push(leaf);
        let mut node = leaf;
        for level in 0..self.height {
            let sibling = self.node_or_zero(level, index ^ 1);
            node = if index & 1 == 1 {
                self.params.hash2(sibling, node)
            } else {
                self.params.hash2(node, sibling)
            };
            index >>= 1;
            if level + 1 < self.height {
                let parents = &mut self.levels[level + 1];
                if index < parents.len() {
                    parents[index] = node;
                } else {
                    parents.push(node);
                }
            }
        }
        self.root_history.push(RootEntry { leaf_count: self.len(), root: node });
        true
    }

    fn node_or_zero(&self, level: usize, index: usize) -> FieldElement {
        self.levels[level].get(index).copied().unwrap_or(self.zeros[level])
    }

    /// Node value at `(level, index)` in the tree truncated to `leaf_count` leaves.
    fn node_at(&self, level: usize, index: usize, leaf_count: usize) -> FieldElement {
        let span = 1usize << level;
        let start = index * span;
        if start >= leaf_count {
            self.zeros[level]
        } else if start + span <= leaf_count.min(self.len()) {
            // Fully populated subtrees never change after they fill.
            if level == self.height {
                self.root()
            } else {
                self.levels[level][index]
            }
        } else {
            let left = self.node_at(level - 1, 2 * index, leaf_count);
            let right = self.node_at(level - 1, 2 * index + 1, leaf_count);
            self.params.hash2(left, right)
        }
    }

    /// Path for `leaf_index` against the current root.
    pub fn path(&self, leaf_index: usize) -> Result<MerklePath, MerkleError> {
        self.path_at(leaf_index, self.len())
    }

    /// Path for `leaf_index` against the historical root covering the first
    /// `leaf_count` leaves.
    pub fn path_at(&self, leaf_index: usize, leaf_count: usize) -> Result<MerklePath, MerkleError> {
        if leaf_index >= leaf_count || leaf_count > self.len() {
            return Err(MerkleError::IndexOutOfBounds { index: leaf_index, leaf_count: leaf_count.min(self.len()) });
        }
        let siblings = (0..self.height)
            .map(|level| self.node_at(level, (leaf_index >> level) ^ 1, leaf_count))
            .collect();
        Ok(MerklePath::from_index(leaf_index, siblings))
    }

    /// Leaf count of the history entry whose root is `root`, if any.
    pub fn leaf_count_for_root(&self, root: FieldElement) -> Option<usize> {
        self.root_history.iter().rev().find(|e| e.root == root).map(|e| e.leaf_count)
    }

    /// Index of the first occurrence of `leaf`.
    pub fn position(&self, leaf: FieldElement) -> Option<usize> {
        self.levels[0].iter().position(|&l| l == leaf)
    }
}

/// Creates an empty tree of height `h` under the standard hash.
pub fn mt_setup(h: usize) -> Result<MerkleTree, MerkleError> {
    MerkleTree::new(h)
}

pub fn mt_add(tree: &mut MerkleTree, y: FieldElement) -> bool {
    tree.add(y)
}

pub fn mt_path(tree: &MerkleTree, leaf_index: usize) -> Result<MerklePath, MerkleError> {
    tree.path(leaf_index)
}

/// Recomputes the root from `y` and `path` under the standard hash.
pub fn mt_verify(y: FieldElement, path: &MerklePath, root: FieldElement) -> bool {
    path.fold(y, &HashParams::standard()) == root
}

//! Frames of discernment and subsets over them.
//!
//! A [`Frame`] is an ordered list of mutually exclusive hypothesis labels.
//! Subsets are bitmasks over the frame's element indices, so a frame holds at
//! most [`MAX_FRAME_SIZE`] labels.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_FRAME_SIZE: usize = 30;

#[derive(Debug)]
struct FrameInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// Ordered set of distinct hypothesis labels.
///
/// Cloning is cheap (shared storage). Two frames compare equal when they are
/// the same allocation or carry the same labels in the same order.
#[derive(Clone)]
pub struct Frame(Arc<FrameInner>);

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if labels.len() > MAX_FRAME_SIZE {
            return Err(Error::FrameTooLarge {
                size: labels.len(),
                limit: MAX_FRAME_SIZE,
            });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Frame(Arc::new(FrameInner { labels, index })))
    }

    /// Frame labelled `h0 .. h{n-1}`.
    pub fn indexed(size: usize) -> Result<Self> {
        Frame::new((0..size).map(|i| format!("h{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.0.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.index.get(label).copied()
    }

    pub fn require_index(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfFrame {
                index,
                size: self.len(),
            })
        }
    }

    /// The whole frame, Θ.
    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn singleton(&self, index: usize) -> Result<Subset> {
        self.check_index(index)?;
        Ok(Subset::singleton(index))
    }

    /// Subset from a list of labels.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<Subset> {
        labels.iter().try_fold(Subset::EMPTY, |acc, l| {
            Ok(acc.with(self.require_index(l.as_ref())?))
        })
    }

    pub fn contains_subset(&self, subset: Subset) -> bool {
        subset.is_subset_of(self.full())
    }

    pub(crate) fn check_subset(&self, subset: Subset) -> Result<()> {
        if self.contains_subset(subset) {
            Ok(())
        } else {
            Err(Error::SubsetOutOfFrame {
                bits: subset.bits(),
                size: self.len(),
            })
        }
    }

    pub fn subset_labels(&self, subset: Subset) -> Vec<&str> {
        subset.members().filter_map(|i| self.label(i)).collect()
    }

    pub fn same_as(&self, other: &Frame) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.labels == other.0.labels
    }

    pub(crate) fn ensure_same(&self, other: &Frame) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Frame").field(&self.0.labels).finish()
    }
}

/// A set of element indices, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn full(size: usize) -> Self {
        debug_assert!(size <= MAX_FRAME_SIZE);
        Subset(((1u64 << size) - 1) as u32)
    }

    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < MAX_FRAME_SIZE);
        Subset(1 << index)
    }

    pub fn with(self, index: usize) -> Self {
        Subset(self.0 | (1 << index))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < 32 && self.0 & (1 << index) != 0
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    /// Complement relative to a frame of `size` elements.
    pub fn complement(self, size: usize) -> Subset {
        Subset(!self.0 & Subset::full(size).0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    /// The single member, if this is a singleton.
    pub fn as_singleton(self) -> Option<usize> {
        (self.0.count_ones() == 1).then(|| self.0.trailing_zeros() as usize)
    }

    /// Member indices in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                Some(i as usize)
            }
        })
    }

    /// All `2^size` subsets of a frame of `size` elements, in bit order.
    pub fn all(size: usize) -> impl Iterator<Item = Subset> {
        (0..(1u64 << size)).map(|b| Subset(b as u32))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

use std::fmt;

/// A subset of at most 64 node ids stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(pub u64);

pub const MAX_NODES: usize = 64;

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    /// `{0, 1, …, n-1}`.
    pub fn full(n: usize) -> NodeSet {
        assert!(n <= MAX_NODES, "NodeSet holds at most {MAX_NODES} nodes");
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(id: usize) -> NodeSet {
        NodeSet(1u64 << id)
    }

    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> NodeSet {
        ids.into_iter().fold(NodeSet::EMPTY, |s, id| s.with(id))
    }

    pub fn with(self, id: usize) -> NodeSet {
        NodeSet(self.0 | (1u64 << id))
    }

    pub fn contains(self, id: usize) -> bool {
        id < MAX_NODES && self.0 >> id & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member ids in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let id = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(id)
            }
        })
    }

    /// Every subset of `self`, in ascending mask order starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = NodeSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let current = next?;
            let following = current.wrapping_sub(mask) & mask;
            next = (following != 0).then_some(following);
            Some(NodeSet(current))
        })
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::from_ids(iter)
    }
}

//! Red-black tree storage keyed by the linear column-major element index.
//!
//! Nodes live in an index-based arena and hold links to two children only;
//! rebalancing walks an explicit ancestor stack instead of parent pointers.
//! In-order traversal yields strictly increasing indices, i.e. column-major
//! element order, which is what makes conversion to CSC a single sweep.
//!
//! Insertions of a key larger than everything seen so far take an append
//! fast path: the node is attached under the cached rightmost path (the
//! "right spine") without any key-comparison descent, while rebalancing
//! still runs on that path.

use crate::error::{Error, Result};
use crate::instrument;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    Red,
    Black,
}

#[derive(Debug, Clone)]
struct Node {
    index: u64,
    value: f64,
    left: u32,
    right: u32,
    color: Color,
}

#[derive(Debug, Clone)]
pub struct RbtStorage {
    n_rows: usize,
    n_cols: usize,
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    n_nonzero: usize,
    /// Largest index ever inserted; monotone, never lowered by deletions.
    /// Only enables the fast path, correctness never depends on it.
    max_index_hint: Option<u64>,
    /// Cached path from the root to the rightmost node. Invalidated by any
    /// structural change away from the right edge, rebuilt on demand.
    spine: Vec<u32>,
    spine_valid: bool,
    fast_path_inserts: u64,
    /// True while every live node was created by an append into a fresh
    /// arena slot: arena order then equals key order, and ordered traversal
    /// degenerates to a linear scan. Falsified by slow-path insertions and
    /// removals; never re-established.
    append_ordered: bool,
}

impl RbtStorage {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            n_nonzero: 0,
            max_index_hint: None,
            spine: Vec::new(),
            spine_valid: true,
            fast_path_inserts: 0,
            append_ordered: true,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_nonzero(&self) -> usize {
        self.n_nonzero
    }

    /// Number of insertions that skipped the placement search because the
    /// key exceeded every existing key.
    pub fn fast_path_inserts(&self) -> u64 {
        self.fast_path_inserts
    }

    fn n_elem(&self) -> u64 {
        self.n_rows as u64 * self.n_cols as u64
    }

    fn check_index(&self, index: u64) -> Result<()> {
        if index >= self.n_elem() {
            return Err(Error::LinearIndexOutOfBounds {
                index,
                n_elem: self.n_elem(),
            });
        }
        Ok(())
    }

    #[inline]
    fn node(&self, n: u32) -> &Node {
        &self.nodes[n as usize]
    }

    #[inline]
    fn node_mut(&mut self, n: u32) -> &mut Node {
        &mut self.nodes[n as usize]
    }

    #[inline]
    fn is_red(&self, n: u32) -> bool {
        n != NIL && self.node(n).color == Color::Red
    }

    fn alloc(&mut self, index: u64, value: f64) -> u32 {
        let node = Node {
            index,
            value,
            left: NIL,
            right: NIL,
            color: Color::Red,
        };
        match self.free.pop() {
            Some(slot) => {
                self.nodes[slot as usize] = node;
                slot
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Repoints the link that `parent` holds to `old` so it holds `new`
    /// instead; `parent == NIL` means `old` was the root.
    fn replace_child(&mut self, parent: u32, old: u32, new: u32) {
        if parent == NIL {
            self.root = new;
        } else if self.node(parent).left == old {
            self.node_mut(parent).left = new;
        } else {
            debug_assert_eq!(self.node(parent).right, old);
            self.node_mut(parent).right = new;
        }
    }

    /// Left-rotates the subtree rooted at `x`; returns the new subtree root.
    /// The caller repoints the parent link.
    fn rotate_left(&mut self, x: u32) -> u32 {
        let y = self.node(x).right;
        debug_assert_ne!(y, NIL);
        self.node_mut(x).right = self.node(y).left;
        self.node_mut(y).left = x;
        y
    }

    fn rotate_right(&mut self, x: u32) -> u32 {
        let y = self.node(x).left;
        debug_assert_ne!(y, NIL);
        self.node_mut(x).left = self.node(y).right;
        self.node_mut(y).right = x;
        y
    }

    /// Stored value at `index`, or zero when absent. O(log N) node visits.
    pub fn lookup(&self, index: u64) -> Result<f64> {
        self.check_index(index)?;
        let mut cur = self.root;
        while cur != NIL {
            let node = self.node(cur);
            match index.cmp(&node.index) {
                std::cmp::Ordering::Less => cur = node.left,
                std::cmp::Ordering::Greater => cur = node.right,
                std::cmp::Ordering::Equal => return Ok(node.value),
            }
        }
        Ok(0.0)
    }

    /// Inserts or overwrites the element at `index`. The caller is expected
    /// to handle zero values (deletion) before calling; storing an explicit
    /// zero violates the format invariant.
    pub fn insert(&mut self, index: u64, value: f64) -> Result<()> {
        self.check_index(index)?;
        debug_assert!(value != 0.0, "zero values are handled by the hybrid layer");

        let append = match self.max_index_hint {
            None => true,
            Some(hint) => index > hint,
        };
        if append {
            if !self.spine_valid {
                self.rebuild_spine();
            }
            let node = self.alloc(index, value);
            match self.spine.last().copied() {
                None => self.root = node,
                Some(rightmost) => {
                    debug_assert!(index > self.node(rightmost).index);
                    self.node_mut(rightmost).right = node;
                }
            }
            self.spine.push(node);
            self.fixup_spine_after_append();
            self.max_index_hint = Some(index);
            self.n_nonzero += 1;
            self.fast_path_inserts += 1;
            return Ok(());
        }

        // The hint is monotone and survives deletions, so a tree emptied by
        // removals can still receive an index at or below the old maximum.
        if self.root == NIL {
            let node = self.alloc(index, value);
            self.node_mut(node).color = Color::Black;
            self.root = node;
            self.spine.clear();
            self.spine.push(node);
            self.spine_valid = true;
            self.n_nonzero += 1;
            return Ok(());
        }

        // General path: descend from the root recording the ancestor stack.
        let mut stack: Vec<u32> = Vec::new();
        let mut cur = self.root;
        loop {
            if cur == NIL {
                break;
            }
            stack.push(cur);
            let node = self.node(cur);
            match index.cmp(&node.index) {
                std::cmp::Ordering::Less => cur = node.left,
                std::cmp::Ordering::Greater => cur = node.right,
                std::cmp::Ordering::Equal => {
                    // Overwrite in place: no structural change.
                    self.node_mut(cur).value = value;
                    return Ok(());
                }
            }
        }
        let node = self.alloc(index, value);
        let parent = *stack
            .last()
            .expect("non-append insert implies a non-empty tree");
        if index < self.node(parent).index {
            self.node_mut(parent).left = node;
        } else {
            self.node_mut(parent).right = node;
        }
        stack.push(node);
        self.spine_valid = false;
        self.append_ordered = false;
        self.insert_fixup(&mut stack);
        self.n_nonzero += 1;
        Ok(())
    }

    fn rebuild_spine(&mut self) {
        self.spine.clear();
        let mut cur = self.root;
        while cur != NIL {
            self.spine.push(cur);
            cur = self.node(cur).right;
        }
        self.spine_valid = true;
    }

    /// Restores the red-black invariants after attaching a red node at the
    /// bottom of the right spine, keeping `self.spine` the exact
    /// root-to-rightmost path throughout. On the right spine the new node is
    /// always a right child of a right child, so the repair is a sequence of
    /// recolorings optionally finished by a single left rotation.
    fn fixup_spine_after_append(&mut self) {
        let mut top = self.spine.len() - 1;
        while top >= 2 && self.is_red(self.spine[top - 1]) {
            let z = self.spine[top];
            let p = self.spine[top - 1];
            let g = self.spine[top - 2];
            let uncle = self.node(g).left;
            debug_assert_eq!(self.node(g).right, p);
            if self.is_red(uncle) {
                self.node_mut(p).color = Color::Black;
                self.node_mut(uncle).color = Color::Black;
                self.node_mut(g).color = Color::Red;
                top -= 2;
            } else {
                self.node_mut(p).color = Color::Black;
                self.node_mut(g).color = Color::Red;
                let g_parent = if top >= 3 { self.spine[top - 3] } else { NIL };
                let new_top = self.rotate_left(g);
                debug_assert_eq!(new_top, p);
                self.replace_child(g_parent, g, new_top);
                debug_assert_eq!(self.node(z).color, Color::Red);
                // g moved off the rightmost path.
                self.spine.remove(top - 2);
                break;
            }
        }
        let root = self.root;
        self.node_mut(root).color = Color::Black;
    }

    /// Standard insert repair driven by the ancestor stack
    /// (`stack[0]` is the root, the last entry the freshly inserted node).
    fn insert_fixup(&mut self, stack: &mut Vec<u32>) {
        loop {
            let k = stack.len();
            if k < 2 {
                break;
            }
            let z = stack[k - 1];
            let p = stack[k - 2];
            if !self.is_red(p) {
                break;
            }
            // A red parent is never the root, so a grandparent exists.
            let g = stack[k - 3];
            let g_parent = if k >= 4 { stack[k - 4] } else { NIL };
            let p_is_left = self.node(g).left == p;
            let uncle = if p_is_left {
                self.node(g).right
            } else {
                self.node(g).left
            };

            if self.is_red(uncle) {
                self.node_mut(p).color = Color::Black;
                self.node_mut(uncle).color = Color::Black;
                self.node_mut(g).color = Color::Red;
                stack.truncate(k - 2);
                continue;
            }

            if p_is_left {
                let new_p = if self.node(p).right == z {
                    let mid = self.rotate_left(p);
                    self.node_mut(g).left = mid;
                    mid
                } else {
                    p
                };
                self.node_mut(new_p).color = Color::Black;
                self.node_mut(g).color = Color::Red;
                let new_top = self.rotate_right(g);
                self.replace_child(g_parent, g, new_top);
            } else {
                let new_p = if self.node(p).left == z {
                    let mid = self.rotate_right(p);
                    self.node_mut(g).right = mid;
                    mid
                } else {
                    p
                };
                self.node_mut(new_p).color = Color::Black;
                self.node_mut(g).color = Color::Red;
                let new_top = self.rotate_left(g);
                self.replace_child(g_parent, g, new_top);
            }
            break;
        }
        let root = self.root;
        self.node_mut(root).color = Color::Black;
    }

    /// Removes the element at `index`; removing an absent index is a no-op.
    /// Returns whether an element was removed.
    pub fn remove(&mut self, index: u64) -> Result<bool> {
        self.check_index(index)?;

        // Locate the node, recording the ancestor stack (target included).
        let mut stack: Vec<u32> = Vec::new();
        let mut cur = self.root;
        while cur != NIL {
            stack.push(cur);
            let node = self.node(cur);
            match index.cmp(&node.index) {
                std::cmp::Ordering::Less => cur = node.left,
                std::cmp::Ordering::Greater => cur = node.right,
                std::cmp::Ordering::Equal => break,
            }
        }
        if cur == NIL {
            return Ok(false);
        }
        let z = cur;
        self.spine_valid = false;
        self.append_ordered = false;

        // Reduce to removing a node with at most one child: if z has two,
        // copy the successor's payload into z and remove the successor.
        let target = if self.node(z).left != NIL && self.node(z).right != NIL {
            let mut s = self.node(z).right;
            stack.push(s);
            while self.node(s).left != NIL {
                s = self.node(s).left;
                stack.push(s);
            }
            let (s_index, s_value) = {
                let n = self.node(s);
                (n.index, n.value)
            };
            let zn = self.node_mut(z);
            zn.index = s_index;
            zn.value = s_value;
            s
        } else {
            z
        };

        debug_assert_eq!(*stack.last().unwrap(), target);
        stack.pop();
        let parent = stack.last().copied().unwrap_or(NIL);
        let child = if self.node(target).left != NIL {
            self.node(target).left
        } else {
            self.node(target).right
        };
        let removed_color = self.node(target).color;
        let dir_left = parent != NIL && self.node(parent).left == target;
        self.replace_child(parent, target, child);
        self.free.push(target);
        self.n_nonzero -= 1;

        if removed_color == Color::Black {
            self.remove_fixup(&mut stack, child, dir_left);
        }
        Ok(true)
    }

    /// Resolves the missing black introduced by unlinking a black node.
    /// `x` (possibly NIL) carries the extra black; `stack` is the path from
    /// the root to x's parent, and `x_is_left` locates x under that parent.
    fn remove_fixup(&mut self, stack: &mut Vec<u32>, mut x: u32, mut x_is_left: bool) {
        while x != self.root && !self.is_red(x) {
            let Some(&p) = stack.last() else {
                break; // x is the root
            };
            if x_is_left {
                let mut w = self.node(p).right;
                debug_assert_ne!(w, NIL, "sibling of a doubly-black node exists");
                if self.is_red(w) {
                    // Sibling red: rotate it above the parent and retry.
                    self.node_mut(w).color = Color::Black;
                    self.node_mut(p).color = Color::Red;
                    let gp = if stack.len() >= 2 {
                        stack[stack.len() - 2]
                    } else {
                        NIL
                    };
                    let new_top = self.rotate_left(p);
                    self.replace_child(gp, p, new_top);
                    let len = stack.len();
                    stack[len - 1] = new_top;
                    stack.push(p);
                    w = self.node(p).right;
                }
                let w_left_red = self.is_red(self.node(w).left);
                let w_right_red = self.is_red(self.node(w).right);
                if !w_left_red && !w_right_red {
                    // Push the deficit up one level.
                    self.node_mut(w).color = Color::Red;
                    x = p;
                    stack.pop();
                    if let Some(&gp) = stack.last() {
                        x_is_left = self.node(gp).left == x;
                    }
                } else {
                    let w = if !w_right_red {
                        // Far child black: rotate the near red child over w.
                        let near = self.node(w).left;
                        self.node_mut(near).color = Color::Black;
                        self.node_mut(w).color = Color::Red;
                        let new_w = self.rotate_right(w);
                        self.node_mut(p).right = new_w;
                        new_w
                    } else {
                        w
                    };
                    self.node_mut(w).color = self.node(p).color;
                    self.node_mut(p).color = Color::Black;
                    let far = self.node(w).right;
                    self.node_mut(far).color = Color::Black;
                    let gp = if stack.len() >= 2 {
                        stack[stack.len() - 2]
                    } else {
                        NIL
                    };
                    let new_top = self.rotate_left(p);
                    self.replace_child(gp, p, new_top);
                    x = self.root;
                }
            } else {
                // Mirror image.
                let mut w = self.node(p).left;
                debug_assert_ne!(w, NIL, "sibling of a doubly-black node exists");
                if self.is_red(w) {
                    self.node_mut(w).color = Color::Black;
                    self.node_mut(p).color = Color::Red;
                    let gp = if stack.len() >= 2 {
                        stack[stack.len() - 2]
                    } else {
                        NIL
                    };
                    let new_top = self.rotate_right(p);
                    self.replace_child(gp, p, new_top);
                    let len = stack.len();
                    stack[len - 1] = new_top;
                    stack.push(p);
                    w = self.node(p).left;
                }
                let w_left_red = self.is_red(self.node(w).left);
                let w_right_red = self.is_red(self.node(w).right);
                if !w_left_red && !w_right_red {
                    self.node_mut(w).color = Color::Red;
                    x = p;
                    stack.pop();
                    if let Some(&gp) = stack.last() {
                        x_is_left = self.node(gp).left == x;
                    }
                } else {
                    let w = if !w_left_red {
                        let near = self.node(w).right;
                        self.node_mut(near).color = Color::Black;
                        self.node_mut(w).color = Color::Red;
                        let new_w = self.rotate_left(w);
                        self.node_mut(p).left = new_w;
                        new_w
                    } else {
                        w
                    };
                    self.node_mut(w).color = self.node(p).color;
                    self.node_mut(p).color = Color::Black;
                    let far = self.node(w).left;
                    self.node_mut(far).color = Color::Black;
                    let gp = if stack.len() >= 2 {
                        stack[stack.len() - 2]
                    } else {
                        NIL
                    };
                    let new_top = self.rotate_right(p);
                    self.replace_child(gp, p, new_top);
                    x = self.root;
                }
            }
        }
        if x != NIL {
            self.node_mut(x).color = Color::Black;
        }
    }

    /// In-order stream of `(index, value)` pairs, i.e. column-major order.
    pub fn iter(&self) -> RbtIter<'_> {
        let mut iter = RbtIter {
            tree: self,
            stack: Vec::new(),
        };
        iter.push_left_edge(self.root);
        iter
    }

    /// In-order visit without the iterator stack. An append-only tree is
    /// visited by a straight arena scan (arena order equals key order);
    /// otherwise the recursion depth is bounded by the tree height, which
    /// the red-black invariants keep at 2*log2(N+1).
    pub(crate) fn for_each_in_order<F: FnMut(u64, f64)>(&self, f: &mut F) {
        if let Some(pairs) = self.sorted_arena_pairs() {
            let steps = pairs.len() as u64;
            for (index, value) in pairs {
                f(index, value);
            }
            instrument::record_rbt_traversal_steps(steps);
        } else {
            let mut steps = 0;
            self.walk_in_order(self.root, f, &mut steps);
            instrument::record_rbt_traversal_steps(steps);
        }
    }

    /// Key-ordered `(index, value)` pairs read straight off the arena, which
    /// is only possible while the tree is append-ordered.
    pub(crate) fn sorted_arena_pairs(
        &self,
    ) -> Option<impl ExactSizeIterator<Item = (u64, f64)> + '_> {
        if self.append_ordered {
            debug_assert!(self.free.is_empty());
            Some(self.nodes.iter().map(|n| (n.index, n.value)))
        } else {
            None
        }
    }

    fn walk_in_order<F: FnMut(u64, f64)>(&self, n: u32, f: &mut F, steps: &mut u64) {
        *steps += 1;
        if n == NIL {
            return;
        }
        let node = &self.nodes[n as usize];
        self.walk_in_order(node.left, f, steps);
        f(node.index, node.value);
        self.walk_in_order(node.right, f, steps);
    }

    /// Number of node levels; an empty tree has height 0.
    pub fn height(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((n, depth)) = stack.pop() {
            if n == NIL {
                continue;
            }
            max = max.max(depth + 1);
            stack.push((self.node(n).left, depth + 1));
            stack.push((self.node(n).right, depth + 1));
        }
        max
    }

    /// Full red-black audit: root color, no red-red edges, uniform black
    /// height, strict in-order key ordering, bounds, and element count.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.root != NIL && self.node(self.root).color != Color::Black {
            return Err("root is red".into());
        }
        self.audit_subtree(self.root)?;
        let mut count = 0;
        let mut prev: Option<u64> = None;
        for (index, value) in self.iter() {
            if index >= self.n_elem() {
                return Err(format!("index {index} out of bounds"));
            }
            if value == 0.0 {
                return Err(format!("explicit zero stored at index {index}"));
            }
            if let Some(p) = prev {
                if index <= p {
                    return Err("in-order indices not strictly increasing".into());
                }
            }
            prev = Some(index);
            count += 1;
        }
        if count != self.n_nonzero {
            return Err(format!(
                "n_nonzero {} but traversal found {count}",
                self.n_nonzero
            ));
        }
        if self.nodes.len() - self.free.len() != self.n_nonzero {
            return Err("arena live-node accounting is off".into());
        }
        Ok(())
    }

    /// Returns the black height of the subtree (NIL counts as 1).
    fn audit_subtree(&self, n: u32) -> std::result::Result<u32, String> {
        if n == NIL {
            return Ok(1);
        }
        let node = self.node(n);
        if node.color == Color::Red && (self.is_red(node.left) || self.is_red(node.right)) {
            return Err(format!("red node {} has a red child", node.index));
        }
        let left = self.audit_subtree(node.left)?;
        let right = self.audit_subtree(node.right)?;
        if left != right {
            return Err(format!(
                "black height mismatch under index {}: {left} vs {right}",
                node.index
            ));
        }
        Ok(left + if node.color == Color::Black { 1 } else { 0 })
    }
}

pub struct RbtIter<'a> {
    tree: &'a RbtStorage,
    stack: Vec<u32>,
}

impl RbtIter<'_> {
    fn push_left_edge(&mut self, mut n: u32) {
        while n != NIL {
            self.stack.push(n);
            n = self.tree.node(n).left;
        }
    }
}

impl Iterator for RbtIter<'_> {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.stack.pop()?;
        let node = self.tree.node(n);
        self.push_left_edge(node.right);
        Some((node.index, node.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_pairs() -> Vec<(u64, f64)> {
        vec![
            (1, 9.0),
            (5, 8.0),
            (8, 7.0),
            (11, 6.0),
            (12, 5.0),
            (19, 4.0),
        ]
    }

    fn audit(tree: &RbtStorage) {
        if let Err(msg) = tree.check_invariants() {
            panic!("red-black audit failed: {msg}");
        }
    }

    #[test]
    fn ascending_inserts_all_take_fast_path() {
        let mut tree = RbtStorage::new(5, 4);
        for (index, value) in example_pairs() {
            tree.insert(index, value).unwrap();
        }
        audit(&tree);
        assert_eq!(tree.fast_path_inserts(), 6);
        let pairs: Vec<_> = tree.iter().collect();
        assert_eq!(pairs, example_pairs());
    }

    #[test]
    fn random_order_matches_sorted_order() {
        let shuffled = [
            (11, 6.0),
            (1, 9.0),
            (19, 4.0),
            (5, 8.0),
            (12, 5.0),
            (8, 7.0),
        ];
        let mut tree = RbtStorage::new(5, 4);
        for (index, value) in shuffled {
            tree.insert(index, value).unwrap();
        }
        audit(&tree);
        let pairs: Vec<_> = tree.iter().collect();
        assert_eq!(pairs, example_pairs());
    }

    #[test]
    fn overwrite_keeps_single_node() {
        let mut tree = RbtStorage::new(5, 4);
        tree.insert(3, 7.0).unwrap();
        tree.insert(3, 2.0).unwrap();
        audit(&tree);
        assert_eq!(tree.n_nonzero(), 1);
        assert_eq!(tree.lookup(3).unwrap(), 2.0);
    }

    #[test]
    fn lookup_missing_and_empty() {
        let mut tree = RbtStorage::new(5, 4);
        assert_eq!(tree.lookup(0).unwrap(), 0.0);
        for (index, value) in example_pairs() {
            tree.insert(index, value).unwrap();
        }
        assert_eq!(tree.lookup(11).unwrap(), 6.0);
        assert_eq!(tree.lookup(2).unwrap(), 0.0);
        assert!(tree.lookup(20).is_err());
    }

    #[test]
    fn remove_node_and_absent() {
        let mut tree = RbtStorage::new(5, 4);
        for (index, value) in example_pairs() {
            tree.insert(index, value).unwrap();
        }
        assert!(tree.remove(11).unwrap());
        audit(&tree);
        assert_eq!(tree.n_nonzero(), 5);
        let indices: Vec<u64> = tree.iter().map(|(i, _)| i).collect();
        assert_eq!(indices, vec![1, 5, 8, 12, 19]);

        assert!(!tree.remove(2).unwrap());
        assert_eq!(tree.n_nonzero(), 5);
        audit(&tree);
    }

    #[test]
    fn drain_in_any_order() {
        for order in [
            [1u64, 5, 8, 11, 12, 19],
            [19, 1, 12, 5, 11, 8],
            [8, 11, 1, 19, 5, 12],
        ] {
            let mut tree = RbtStorage::new(5, 4);
            for (index, value) in example_pairs() {
                tree.insert(index, value).unwrap();
            }
            for index in order {
                assert!(tree.remove(index).unwrap());
                audit(&tree);
            }
            assert_eq!(tree.n_nonzero(), 0);
            assert_eq!(tree.iter().count(), 0);
        }
    }

    #[test]
    fn insert_below_stale_hint_into_drained_tree() {
        // Drain the tree, then insert an index at or below the old maximum:
        // the monotone hint must not break the empty-tree insert.
        let mut tree = RbtStorage::new(10, 10);
        tree.insert(50, 1.0).unwrap();
        assert!(tree.remove(50).unwrap());
        tree.insert(3, 2.0).unwrap();
        audit(&tree);
        assert_eq!(tree.lookup(3).unwrap(), 2.0);
        assert_eq!(tree.n_nonzero(), 1);

        tree.insert(50, 4.0).unwrap();
        tree.insert(2, 5.0).unwrap();
        audit(&tree);
        assert_eq!(tree.n_nonzero(), 3);
    }

    #[test]
    fn append_after_delete_of_maximum() {
        // The hint stays at the deleted maximum; the next larger key must
        // still append correctly.
        let mut tree = RbtStorage::new(10, 10);
        for i in 0..20 {
            tree.insert(i, (i + 1) as f64).unwrap();
        }
        assert!(tree.remove(19).unwrap());
        tree.insert(25, 1.5).unwrap();
        audit(&tree);
        assert_eq!(tree.lookup(25).unwrap(), 1.5);
        assert_eq!(tree.lookup(19).unwrap(), 0.0);
    }

    #[test]
    fn interleaved_random_inserts_and_appends() {
        // Mix slow-path inserts (invalidating the spine) with appends.
        let mut tree = RbtStorage::new(100, 100);
        let mut next_big = 5000u64;
        let mut key = 1234u64;
        for step in 0..2000 {
            if step % 3 == 0 {
                next_big += 7;
                tree.insert(next_big, 1.0).unwrap();
            } else {
                key = (key.wrapping_mul(48271)) % 4999;
                tree.insert(key + 1, 2.0).unwrap();
            }
        }
        audit(&tree);
    }

    #[test]
    fn ordered_visit_agrees_with_iterator_in_both_modes() {
        // Append-only tree: scan mode.
        let mut appended = RbtStorage::new(100, 100);
        for i in (0..500).map(|k| k * 7 % 9000) {
            if appended.max_index_hint.is_none_or(|h| i as u64 > h) {
                appended.insert(i as u64, 1.0 + i as f64).unwrap();
            }
        }
        assert!(appended.append_ordered);
        let mut scanned = Vec::new();
        appended.for_each_in_order(&mut |i, v| scanned.push((i, v)));
        assert_eq!(scanned, appended.iter().collect::<Vec<_>>());

        // Random inserts and removals: tree-walk mode.
        let mut mixed = RbtStorage::new(100, 100);
        let mut key = 77u64;
        for step in 0..800 {
            key = key.wrapping_mul(6364136223846793005).wrapping_add(11);
            let idx = key % 10_000;
            if step % 5 == 0 {
                mixed.remove(idx).unwrap();
            } else {
                mixed.insert(idx, 0.5).unwrap();
            }
        }
        assert!(!mixed.append_ordered);
        let mut walked = Vec::new();
        mixed.for_each_in_order(&mut |i, v| walked.push((i, v)));
        assert_eq!(walked, mixed.iter().collect::<Vec<_>>());
    }

    #[test]
    fn height_bound_on_random_keys() {
        let mut tree = RbtStorage::new(1000, 1000);
        let mut key = 99991u64;
        let mut n = 0u64;
        for _ in 0..4096 {
            key = key
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let idx = key % 1_000_000;
            if tree.lookup(idx).unwrap() == 0.0 {
                n += 1;
            }
            tree.insert(idx, 1.0).unwrap();
        }
        audit(&tree);
        let bound = 2.0 * ((n + 1) as f64).log2();
        assert!(
            (tree.height() as f64) <= bound,
            "height {} exceeds 2*log2(N+1) = {bound}",
            tree.height()
        );
    }
}

//! Addressable binary max-heap over dense item ids.

/// Max-heap of items `0..capacity`, each with a key that can be changed or
/// removed in `O(log n)`.
#[derive(Debug, Clone)]
pub struct IndexedMaxHeap<K> {
    heap: Vec<usize>,
    keys: Vec<Option<K>>,
    position: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl<K: Ord + Copy> IndexedMaxHeap<K> {
    pub fn new(capacity: usize) -> Self {
        IndexedMaxHeap {
            heap: Vec::with_capacity(capacity),
            keys: vec![None; capacity],
            position: vec![ABSENT; capacity],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.position[item] != ABSENT
    }

    pub fn key(&self, item: usize) -> Option<K> {
        self.keys[item]
    }

    pub fn peek(&self) -> Option<(usize, K)> {
        self.heap.first().map(|&i| (i, self.keys[i].unwrap()))
    }

    /// Inserts `item` or changes its key.
    pub fn set(&mut self, item: usize, key: K) {
        match self.keys[item].replace(key) {
            None => {
                self.position[item] = self.heap.len();
                self.heap.push(item);
                self.sift_up(self.heap.len() - 1);
            }
            Some(old) if key > old => self.sift_up(self.position[item]),
            Some(old) if key < old => self.sift_down(self.position[item]),
            Some(_) => {}
        }
    }

    pub fn remove(&mut self, item: usize) -> Option<K> {
        let key = self.keys[item].take()?;
        let pos = self.position[item];
        self.position[item] = ABSENT;
        let last = self.heap.pop().unwrap();
        if pos < self.heap.len() {
            self.heap[pos] = last;
            self.position[last] = pos;
            self.sift_down(pos);
            self.sift_up(self.position[last]);
        }
        Some(key)
    }

    pub fn pop(&mut self) -> Option<(usize, K)> {
        let (item, key) = self.peek()?;
        self.remove(item);
        Some((item, key))
    }

    fn less(&self, a: usize, b: usize) -> bool {
        self.keys[self.heap[a]] < self.keys[self.heap[b]]
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position[self.heap[a]] = a;
        self.position[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(parent, i) {
                break;
            }
            self.swap(parent, i);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len() && self.less(left, right) {
                right
            } else {
                left
            };
            if !self.less(i, child) {
                break;
            }
            self.swap(i, child);
            i = child;
        }
    }
}

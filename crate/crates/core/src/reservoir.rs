//! Uniform reservoir sampling over a stream (Algorithm R).

use rand::Rng;

/// What happened to the item offered at step `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    /// Appended while the reservoir was still filling.
    Filled(usize),
    /// Replaced the item previously held in this slot.
    Replaced(usize),
    Rejected,
}

/// Keeps a uniform sample of at most `capacity` items from a stream of
/// unknown length: after `t` offers, every offered item is retained with
/// probability `min(1, capacity / t)`.
#[derive(Clone, Debug)]
pub struct Reservoir<T> {
    capacity: usize,
    seen: u64,
    items: Vec<T>,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            seen: 0,
            items: Vec::with_capacity(capacity),
        }
    }

    pub fn offer<R: Rng + ?Sized>(&mut self, item: T, rng: &mut R) -> Admission {
        self.seen += 1;
        if self.capacity == 0 {
            return Admission::Rejected;
        }
        if self.items.len() < self.capacity {
            self.items.push(item);
            return Admission::Filled(self.items.len() - 1);
        }
        let j = rng.random_range(0..self.seen);
        if (j as usize) < self.capacity {
            self.items[j as usize] = item;
            Admission::Replaced(j as usize)
        } else {
            Admission::Rejected
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn items_mut(&mut self) -> &mut [T] {
        &mut self.items
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

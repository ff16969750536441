//! Small helpers for `u64` bit-sets over at most 64 elements.

/// Iterator over the set bits of a mask, lowest first.
#[derive(Clone, Copy, Debug)]
pub struct Bits(u64);

impl Iterator for Bits {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Bits {}

pub fn bits(mask: u64) -> Bits {
    Bits(mask)
}

/// Mask with the lowest `n` bits set.
pub fn full(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn bit(i: usize) -> u64 {
    1u64 << i
}

pub fn contains(mask: u64, i: usize) -> bool {
    mask >> i & 1 == 1
}

pub fn is_subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// All submasks of `mask`, in increasing numeric order.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut sub = Some(0u64);
    std::iter::from_fn(move || {
        let cur = sub?;
        sub = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
        Some(cur)
    })
}

pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> u64 {
    it.into_iter().fold(0, |m, i| m | bit(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submasks_enumerates_in_order() {
        let subs: Vec<u64> = submasks(0b1010).collect();
        assert_eq!(subs, vec![0b0000, 0b0010, 0b1000, 0b1010]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn bits_roundtrip() {
        let m = 0b1011_0001u64;
        assert_eq!(from_indices(bits(m)), m);
        assert_eq!(bits(m).len(), 4);
        assert_eq!(full(3), 0b111);
        assert_eq!(full(64), u64::MAX);
    }
}

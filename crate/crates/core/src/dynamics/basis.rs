//! Composite basis states and reachable-subspace construction.
//!
//! A basis state packs one 4-bit level code per atom into a `u64`: controls
//! occupy slots `0..n`, the target slot `n`. Codes 0–3 are the physical
//! levels; codes from 4 up label the members of off-resonant pair states,
//! which only ever appear two at a time.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the packed encoding supports (16 slots of 4 bits).
pub const MAX_CONTROLS: usize = 15;

pub const G0: u8 = 0;
pub const G1: u8 = 1;
pub const P: u8 = 2;
pub const S: u8 = 3;

/// Codes of the two members of control-target leakage channel `c`
/// (0-based): the pair |a b⟩ stores `leak_a(c)` on one atom and
/// `leak_b(c)` on the other.
pub const fn leak_a(c: usize) -> u8 {
    4 + 2 * c as u8
}
pub const fn leak_b(c: usize) -> u8 {
    5 + 2 * c as u8
}
/// Members of the control-control leakage pair |Pr⟩.
pub const PR_A: u8 = 12;
pub const PR_B: u8 = 13;

/// Physical level names for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Zero,
    One,
    P,
    S,
    /// Member of an off-resonant pair state (code ≥ 4).
    Leak(u8),
}

impl Level {
    pub fn code(self) -> u8 {
        match self {
            Level::Zero => G0,
            Level::One => G1,
            Level::P => P,
            Level::S => S,
            Level::Leak(c) => c,
        }
    }

    pub fn from_code(c: u8) -> Self {
        match c {
            G0 => Level::Zero,
            G1 => Level::One,
            P => Level::P,
            S => Level::S,
            other => Level::Leak(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState(pub u64);

impl BasisState {
    #[inline]
    pub fn level(self, atom: usize) -> u8 {
        ((self.0 >> (4 * atom)) & 0xF) as u8
    }

    #[inline]
    pub fn with(self, atom: usize, code: u8) -> Self {
        let shift = 4 * atom;
        BasisState((self.0 & !(0xF << shift)) | ((code as u64) << shift))
    }

    /// Computational-basis state for `index` in [0, 2^{n+1}): reading the
    /// bits most-significant first gives c₁ … c_n t.
    pub fn computational(index: usize, n: usize) -> Self {
        let mut s = BasisState(0);
        for j in 0..n {
            s = s.with(j, ((index >> (n - j)) & 1) as u8);
        }
        s.with(n, (index & 1) as u8)
    }

    /// Inverse of [`BasisState::computational`]; `None` if any atom is
    /// outside {|0⟩, |1⟩}.
    pub fn computational_index(self, n: usize) -> Option<usize> {
        let mut idx = 0usize;
        for j in 0..=n {
            let l = self.level(j);
            if l > G1 {
                return None;
            }
            idx = (idx << 1) | l as usize;
        }
        Some(idx)
    }

    pub fn label(self, n: usize) -> String {
        let name = |c: u8| match c {
            G0 => "0".to_string(),
            G1 => "1".to_string(),
            P => "p".to_string(),
            S => "s".to_string(),
            other => format!("x{other}"),
        };
        let mut out: String = (0..n)
            .map(|j| name(self.level(j)))
            .collect::<Vec<_>>()
            .join(",");
        out.push('|');
        out.push_str(&name(self.level(n)));
        out
    }
}

/// Per-atom basis {|0⟩, |1⟩, |p⟩, |s⟩} for n controls plus the target,
/// without leakage levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub n: usize,
}

impl LevelScheme {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_CONTROLS {
            return Err(Error::UnsupportedN(n));
        }
        Ok(Self { n })
    }

    pub fn atoms(&self) -> usize {
        self.n + 1
    }

    /// 4^(n+1).
    pub fn dimension(&self) -> u128 {
        4u128.pow(self.atoms() as u32)
    }

    /// Position in the full product basis (base-4 digits, atom 0 least
    /// significant). Leakage codes have no index here.
    pub fn index_of(&self, s: BasisState) -> Option<u128> {
        let mut idx = 0u128;
        for a in (0..self.atoms()).rev() {
            let l = s.level(a);
            if l > S {
                return None;
            }
            idx = idx * 4 + l as u128;
        }
        Some(idx)
    }

    pub fn state_of(&self, mut index: u128) -> Option<BasisState> {
        if index >= self.dimension() {
            return None;
        }
        let mut s = BasisState(0);
        for a in 0..self.atoms() {
            s = s.with(a, (index % 4) as u8);
            index /= 4;
        }
        Some(s)
    }
}

/// Ordered basis of a closed subspace with its reverse index.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub states: Vec<BasisState>,
    pub index: HashMap<BasisState, usize>,
}

impl Subspace {
    /// Breadth-first closure of `seeds` under `neighbours`, sorted so the
    /// ordering depends only on the set.
    pub fn closure<F>(seeds: &[BasisState], mut neighbours: F) -> Self
    where
        F: FnMut(BasisState, &mut Vec<BasisState>),
    {
        let mut seen: HashMap<BasisState, ()> = HashMap::new();
        let mut queue: VecDeque<BasisState> = VecDeque::new();
        for s in seeds {
            if seen.insert(*s, ()).is_none() {
                queue.push_back(*s);
            }
        }
        let mut buf = Vec::new();
        while let Some(s) = queue.pop_front() {
            buf.clear();
            neighbours(s, &mut buf);
            for &m in &buf {
                if seen.insert(m, ()).is_none() {
                    queue.push_back(m);
                }
            }
        }
        let mut states: Vec<BasisState> = seen.into_keys().collect();
        states.sort();
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn computational_round_trip() {
        let n = 3;
        for i in 0..(1 << (n + 1)) {
            let s = BasisState::computational(i, n);
            assert_eq!(s.computational_index(n), Some(i));
        }
        // |101⟩ for n = 2: c1 = 1, c2 = 0, t = 1.
        let s = BasisState::computational(0b101, 2);
        assert_eq!((s.level(0), s.level(1), s.level(2)), (1, 0, 1));
        assert_eq!(s.label(2), "1,0|1");
    }

    #[test]
    fn level_scheme_is_a_bijection() {
        let ls = LevelScheme::new(2).unwrap();
        assert_eq!(ls.dimension(), 64);
        for i in 0..ls.dimension() {
            let s = ls.state_of(i).unwrap();
            assert_eq!(ls.index_of(s), Some(i));
        }
        assert!(ls.state_of(64).is_none());
        assert!(ls.index_of(BasisState(0).with(0, PR_A)).is_none());
        assert!(LevelScheme::new(0).is_err());
        assert!(LevelScheme::new(16).is_err());
    }

    #[test]
    fn with_only_touches_one_slot() {
        let s = BasisState(0).with(3, S).with(1, P);
        assert_eq!(s.level(3), S);
        assert_eq!(s.level(1), P);
        assert_eq!(s.with(3, G1).level(1), P);
        assert_eq!(Level::from_code(Level::Leak(7).code()), Level::Leak(7));
    }

    #[test]
    fn closure_is_order_independent() {
        // A chain 0 -> 1 -> 2 -> 0 over a single slot.
        let step = |s: BasisState, out: &mut Vec<BasisState>| {
            out.push(s.with(0, (s.level(0) + 1) % 3));
        };
        let a = Subspace::closure(&[BasisState(0)], step);
        let b = Subspace::closure(&[BasisState(2)], step);
        assert_eq!(a.states, b.states);
        assert_eq!(a.len(), 3);
        for (i, s) in a.states.iter().enumerate() {
            assert_eq!(a.index[s], i);
        }
    }
}

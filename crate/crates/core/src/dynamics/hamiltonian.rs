//! Matrix elements of the effective (non-Hermitian) Hamiltonian.
//!
//! H = H_drive(stage) + H_int + H_leak + H_Doppler − (i/2) Σ γ_k |k⟩⟨k|.

use nalgebra::DMatrix;

use super::basis::{leak_a, leak_b, BasisState, Subspace, G0, G1, P, PR_A, PR_B, S};
use super::model::{GateModel, PulseStage, Stage, C64};

/// Off-diagonal elements ⟨m|H_drive|s⟩ of one stage.
pub fn drive_couplings(
    n: usize,
    stage: &PulseStage,
    s: BasisState,
    f: &mut impl FnMut(BasisState, C64),
) {
    let a = stage.amplitude;
    if stage.stage.drives_controls() {
        for j in 0..n {
            match s.level(j) {
                G0 => f(s.with(j, P), a * 0.5),
                P => f(s.with(j, G0), a.conj() * 0.5),
                _ => {}
            }
        }
    } else if let Some(src) = stage.stage.target_source() {
        let l = s.level(n);
        if l == src {
            f(s.with(n, S), a * 0.5);
        } else if l == S {
            f(s.with(n, src), a.conj() * 0.5);
        }
    }
}

/// Off-diagonal elements of the stage-independent interaction part.
pub fn interaction_couplings(m: &GateModel, s: BasisState, f: &mut impl FnMut(BasisState, C64)) {
    let n = m.n;
    let t = s.level(n);
    for j in 0..n {
        let c = s.level(j);
        match (c, t) {
            (P, S) => {
                f(s.with(j, S).with(n, P), C64::from(m.u_ct[j]));
                for (k, ch) in m.leakage.ct.iter().enumerate() {
                    f(
                        s.with(j, leak_a(k)).with(n, leak_b(k)),
                        C64::from(ch.coupling[j]),
                    );
                }
            }
            (S, P) => {
                f(s.with(j, P).with(n, S), C64::from(m.u_ct[j]));
                for (k, ch) in m.leakage.ct.iter().enumerate() {
                    f(
                        s.with(j, leak_b(k)).with(n, leak_a(k)),
                        C64::from(ch.coupling[j]),
                    );
                }
            }
            _ => {
                for (k, ch) in m.leakage.ct.iter().enumerate() {
                    if c == leak_a(k) && t == leak_b(k) {
                        f(s.with(j, P).with(n, S), C64::from(ch.coupling[j]));
                    } else if c == leak_b(k) && t == leak_a(k) {
                        f(s.with(j, S).with(n, P), C64::from(ch.coupling[j]));
                    }
                }
            }
        }
    }
    if let Some(cc) = &m.leakage.cc {
        for j in 0..n {
            for k in (j + 1)..n {
                let b = C64::from(cc.coupling[crate::interactions::pair_index(j, k, n)]);
                match (s.level(j), s.level(k)) {
                    (P, P) => f(s.with(j, PR_A).with(k, PR_B), b),
                    (PR_A, PR_B) => f(s.with(j, P).with(k, P), b),
                    _ => {}
                }
            }
        }
    }
}

/// Hermitian diagonal: vdW (or pair-state detuning), channel detunings and
/// Doppler shifts.
pub fn diagonal_energy(m: &GateModel, s: BasisState) -> f64 {
    let n = m.n;
    let mut e = 0.0;
    match &m.leakage.cc {
        None => {
            for j in 0..n {
                if s.level(j) != P {
                    continue;
                }
                for k in (j + 1)..n {
                    if s.level(k) == P {
                        e += m.cc(j, k);
                    }
                }
            }
        }
        Some(cc) => {
            for j in 0..n {
                if s.level(j) == PR_A {
                    e += cc.delta;
                }
            }
        }
    }
    for j in 0..n {
        let c = s.level(j);
        for (k, ch) in m.leakage.ct.iter().enumerate() {
            if c == leak_a(k) || c == leak_b(k) {
                e += ch.delta;
            }
        }
        let dc = m.noise.detuning_c(j);
        match c {
            P => e -= dc,
            S => e -= dc + m.noise.detuning_t,
            _ => {}
        }
    }
    if s.level(n) == S {
        e -= m.noise.detuning_t;
    }
    e
}

/// Total decay rate out of `s` (sum over atoms in |p⟩ or |s⟩).
pub fn decay_rate(m: &GateModel, s: BasisState) -> f64 {
    (0..=m.n).map(|a| m.rate(s.level(a))).sum()
}

/// All states coupled to `s` by any stage or by the interaction.
pub fn neighbours(
    m: &GateModel,
    stages: &[PulseStage; 5],
    s: BasisState,
    out: &mut Vec<BasisState>,
) {
    let mut push = |t: BasisState, _: C64| out.push(t);
    for st in stages {
        // S2 and S4 drive the same transition.
        if st.stage == Stage::S4 {
            continue;
        }
        drive_couplings(m.n, st, s, &mut push);
    }
    interaction_couplings(m, s, &mut push);
}

/// Visit every nonzero entry (row, col, value) of the stage H_eff on `sub`.
/// Couplings leaving the subspace are dropped, so `sub` should be closed.
pub fn for_each_entry(
    m: &GateModel,
    stage: &PulseStage,
    sub: &Subspace,
    mut f: impl FnMut(usize, usize, C64),
) {
    for (col, &s) in sub.states.iter().enumerate() {
        f(
            col,
            col,
            C64::new(diagonal_energy(m, s), -0.5 * decay_rate(m, s)),
        );
        let mut put = |t: BasisState, v: C64| {
            if let Some(&row) = sub.index.get(&t) {
                f(row, col, v);
            }
        };
        drive_couplings(m.n, stage, s, &mut put);
        interaction_couplings(m, s, &mut put);
    }
}

/// Dense H_eff of one stage restricted to `sub`.
pub fn effective_hamiltonian(m: &GateModel, stage: &PulseStage, sub: &Subspace) -> DMatrix<C64> {
    let d = sub.len();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for_each_entry(m, stage, sub, |r, c, v| h[(r, c)] += v);
    h
}

/// Sparse H_eff of one stage restricted to `sub`.
pub fn sparse_hamiltonian(m: &GateModel, stage: &PulseStage, sub: &Subspace) -> super::expmv::Csr {
    let mut entries = Vec::new();
    for_each_entry(m, stage, sub, |r, c, v| entries.push((r, c, v)));
    super::expmv::Csr::from_triplets(sub.len(), entries)
}

/// Pure-state evolution of `start` through an arbitrary stage sequence with
/// exact stage propagators. Decay enters only as norm loss; the state is not
/// renormalized. A zero-amplitude stage is free evolution.
pub fn evolve_sequence(
    m: &GateModel,
    seq: &[PulseStage],
    start: BasisState,
) -> crate::error::Result<(Subspace, nalgebra::DVector<C64>)> {
    let sub = Subspace::closure(&[start], |s, out| {
        let mut push = |t: BasisState, _: C64| out.push(t);
        for st in seq {
            drive_couplings(m.n, st, s, &mut push);
        }
        interaction_couplings(m, s, &mut push);
    });
    let mut psi = nalgebra::DVector::<C64>::zeros(sub.len());
    psi[sub.index[&start]] = C64::from(1.0);
    for st in seq {
        let u = (effective_hamiltonian(m, st, &sub) * C64::new(0.0, -st.duration)).exp();
        psi = u * psi;
    }
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(crate::error::Error::Numerical(
            "propagated state not finite".into(),
        ));
    }
    Ok((sub, psi))
}

/// Whether a basis state has any atom outside the qubit levels.
pub fn is_excited(s: BasisState, n: usize) -> bool {
    (0..=n).any(|a| s.level(a) > G1)
}

/// Number of controls in |p⟩.
pub fn controls_in_p(s: BasisState, n: usize) -> usize {
    (0..n).filter(|&j| s.level(j) == P).count()
}

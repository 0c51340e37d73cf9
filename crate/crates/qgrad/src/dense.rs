//! Dense linear-algebra utilities.
//!
//! These routines form an independent reference path: circuit unitaries are
//! assembled here from matrix exponentials and explicit embeddings, with no
//! shared code with the fast statevector simulator, so the two can check each
//! other.  Everything is dense and only meant for small registers (the
//! exported builders respect [`crate::pauli::MATRIX_QUBIT_CAP`]).

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::pauli::MATRIX_QUBIT_CAP;

/// Eigenvalues of a Hermitian complex matrix.
///
/// Works through the real symmetric embedding `[[A, -B], [B, A]]` of
/// `H = A + iB`, whose spectrum is that of `H` with every eigenvalue
/// doubled in multiplicity — harmless for spectra and distinctness tests.
/// Values are returned with those duplicates included, in no particular
/// order.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let d = m.nrows();
    let mut real = nalgebra::DMatrix::<f64>::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let v = m[(r, c)];
            real[(r, c)] = v.re;
            real[(r + d, c + d)] = v.re;
            real[(r, c + d)] = -v.im;
            real[(r + d, c)] = v.im;
        }
    }
    // Symmetrise away floating-point noise so SymmetricEigen's assumption
    // holds exactly.
    let sym = (&real + real.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues.iter().copied().collect()
}

/// Matrix exponential `exp(M)` by scaling-and-squaring with a Taylor core.
///
/// The matrix is scaled by `2^-s` until its max-norm is at most 1/2, the
/// series is summed to machine precision, and the result squared `s` times.
pub fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = m.nrows();
    assert_eq!(d, m.ncols(), "expm needs a square matrix");
    let norm = m.iter().map(|v| v.norm()).fold(0.0f64, f64::max) * d as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / Complex::new(2f64.powi(s as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(d, d);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    for k in 1..200 {
        term = (&term * &scaled) / Complex::new(k as f64, 0.0);
        let t_norm: f64 = term.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        result += &term;
        if t_norm < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Dense unitary of a gate on a `qubits`-sized register.
///
/// Rotations go through [`expm`] on the generator matrix rather than any
/// closed form, keeping this path independent of the simulator.
pub fn op_unitary(op: &GateOp, qubits: usize) -> Result<DMatrix<Complex64>> {
    if qubits > MATRIX_QUBIT_CAP {
        return Err(Error::TooManyQubits {
            qubits,
            cap: MATRIX_QUBIT_CAP,
            context: "dense circuit unitaries",
        });
    }
    let dim = 1usize << qubits;
    match op {
        GateOp::PauliRotation { word, angle } => {
            let h = word.extended(qubits)?.to_matrix()?;
            Ok(expm(&(h * Complex64::new(0.0, -angle / 2.0))))
        }
        GateOp::GeneratorRotation { generator, angle } => {
            let h = generator.extended(qubits)?.to_matrix()?;
            Ok(expm(&(h * Complex64::new(0.0, -angle / 2.0))))
        }
        GateOp::ControlledPauli {
            control,
            value,
            word,
        } => {
            let w = word.extended(qubits)?;
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for b in 0..dim as u64 {
                let ctrl_bit = b >> control & 1 == 1;
                if ctrl_bit == *value {
                    m[((b ^ w.x_mask()) as usize, b as usize)] += w.phase_at(b);
                } else {
                    m[(b as usize, b as usize)] += Complex64::new(1.0, 0.0);
                }
            }
            Ok(m)
        }
        GateOp::AncillaPrep { qubit, plus_i } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let i = if *plus_i {
                Complex64::new(0.0, s)
            } else {
                Complex64::new(0.0, -s)
            };
            let local = DMatrix::from_row_slice(
                2,
                2,
                &[Complex64::new(s, 0.0), Complex64::new(s, 0.0), i, -i],
            );
            Ok(embed_on_qubits(&local, &[*qubit], qubits))
        }
        GateOp::InverseSegment(ops) => {
            let mut m = DMatrix::<Complex64>::identity(dim, dim);
            // (U_k ... U_1)^dagger = U_1^dagger ... U_k^dagger.
            for inner in ops {
                let u = op_unitary(inner, qubits)?;
                m *= u.adjoint();
            }
            Ok(m)
        }
    }
}

/// Dense unitary of a whole circuit (ops applied left to right).
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << circuit.qubit_count();
    let mut m = DMatrix::<Complex64>::identity(dim, dim);
    for op in circuit.ops() {
        m = op_unitary(op, circuit.qubit_count())? * m;
    }
    Ok(m)
}

/// Projector `|0...0><0...0|` on `n` qubits.
pub fn projector_zero(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m
}

/// Embed a gate acting on the ordered qubit list `qs` into an `n`-qubit
/// register.  Bit `i` of the local index corresponds to `qs[i]`, matching
/// the global convention that index bit `q` holds qubit `q`.
pub fn embed_on_qubits(local: &DMatrix<Complex64>, qs: &[usize], n: usize) -> DMatrix<Complex64> {
    let k = qs.len();
    assert_eq!(local.nrows(), 1 << k);
    let dim = 1usize << n;
    let rest_mask: u64 = {
        let mut m = (dim - 1) as u64;
        for &q in qs {
            m &= !(1u64 << q);
        }
        m
    };
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim as u64 {
        let mut local_col = 0usize;
        for (i, &q) in qs.iter().enumerate() {
            local_col |= ((col >> q & 1) as usize) << i;
        }
        let fixed = col & rest_mask;
        for local_row in 0..1usize << k {
            let v = local[(local_row, local_col)];
            if v.norm() == 0.0 {
                continue;
            }
            let mut row = fixed;
            for (i, &q) in qs.iter().enumerate() {
                row |= ((local_row >> i & 1) as u64) << q;
            }
            out[(row as usize, col as usize)] += v;
        }
    }
    out
}

/// `<0| C^dagger O C |0>` for a dense observable — the reference expectation
/// used to cross-check the simulator.
pub fn dense_expectation(circuit: &Circuit, observable: &DMatrix<Complex64>) -> Result<f64> {
    let u = circuit_unitary(circuit)?;
    let dim = u.nrows();
    let mut state = DMatrix::<Complex64>::zeros(dim, 1);
    state[(0, 0)] = Complex64::new(1.0, 0.0);
    let state = &u * state;
    let val = (state.adjoint() * observable * &state)[(0, 0)];
    Ok(val.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliSum;

    #[test]
    fn eigenvalues_of_pauli_x() {
        let x = crate::pauli::PauliLetter::X.matrix();
        let mut eigs = hermitian_eigenvalues(&x);
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Each value doubled by the real embedding.
        assert_eq!(eigs.len(), 4);
        assert!((eigs[0] + 1.0).abs() < 1e-12 && (eigs[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.0, 1.0);
        m[(1, 1)] = Complex64::new(0.0, -2.0);
        let e = expm(&m);
        assert!((e[(0, 0)] - Complex64::new(1f64.cos(), 1f64.sin())).norm() < 1e-14);
        assert!((e[(1, 1)] - Complex64::new(2f64.cos(), -(2f64.sin()))).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn expm_matches_rotation_closed_form() {
        // exp(-i theta/2 X) = cos(theta/2) I - i sin(theta/2) X.
        let theta = 0.7313;
        let x = crate::pauli::PauliLetter::X.matrix();
        let e = expm(&(x.clone() * Complex64::new(0.0, -theta / 2.0)));
        let expect = DMatrix::<Complex64>::identity(2, 2)
            * Complex64::new((theta / 2.0).cos(), 0.0)
            + x * Complex64::new(0.0, -(theta / 2.0).sin());
        assert!((e - expect).norm() < 1e-13);
    }

    #[test]
    fn expm_handles_large_norms() {
        // Scaling must kick in: exp(-i * 40 * Z) is still unitary with the
        // right phase.
        let z = crate::pauli::PauliLetter::Z.matrix();
        let e = expm(&(z * Complex64::new(0.0, -40.0)));
        assert!((e[(0, 0)] - Complex64::new(40f64.cos(), -40f64.sin())).norm() < 1e-10);
        assert!((e[(1, 1)] - Complex64::new(40f64.cos(), 40f64.sin())).norm() < 1e-10);
    }

    #[test]
    fn embedding_places_qubits_correctly() {
        // X on qubit 1 of 2: flips the high index bit.
        let x = crate::pauli::PauliLetter::X.matrix();
        let m = embed_on_qubits(&x, &[1], 2);
        let direct = PauliSum::parse_terms(2, &[(1.0, "IX")])
            .unwrap()
            .to_matrix()
            .unwrap();
        assert!((m - direct).norm() < 1e-14);
    }
}

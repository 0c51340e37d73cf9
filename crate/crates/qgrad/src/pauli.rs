//! Pauli words and real-weighted Pauli sums.
//!
//! Words are stored in the symplectic bit representation: a word on `n`
//! qubits is a pair of masks `(x, z)` where bit `q` of `x`/`z` records an
//! X/Z factor on qubit `q` (Y sets both).  Multiplication and commutation
//! checks are then mask arithmetic.  Qubit 0 is the *leftmost* character of
//! the string form, so `"ZIX"` is Z on qubit 0 and X on qubit 2.
//!
//! A [`PauliSum`] is a normalised list of `(coefficient, word)` pairs: terms
//! are kept sorted, duplicate words merged, and coefficients smaller than
//! [`COEFF_EPS`] in magnitude dropped.  Hermitian operator utilities
//! (dense matrix form, Pauli decomposition of a dense matrix, spectrum)
//! live here as well.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest operator size for which dense 2^n x 2^n forms are built.
pub const MATRIX_QUBIT_CAP: usize = 12;

/// Coefficients with smaller magnitude are treated as zero when sums are
/// normalised or matrices decomposed.
pub const COEFF_EPS: f64 = 1e-12;

/// Eigenvalues closer than this are merged when reporting a spectrum.
pub const SPECTRUM_EPS: f64 = 1e-8;

/// Allowed deviation from Hermiticity (and from exact reconstruction) when
/// decomposing a dense matrix.
pub const HERMITICITY_EPS: f64 = 1e-10;

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    /// Symplectic bits `(x, z)` of the letter.
    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(PauliLetter::I),
            'X' | 'x' => Some(PauliLetter::X),
            'Y' | 'y' => Some(PauliLetter::Y),
            'Z' | 'z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    /// Dense 2x2 form.
    pub fn matrix(self) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliLetter::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            PauliLetter::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            PauliLetter::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            PauliLetter::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// Fourth root of unity, i.e. a power of `i`.  Pauli products pick up exactly
/// these phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    /// Phase corresponding to `i^exp`.
    pub fn from_exp(exp: u32) -> Self {
        match exp % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// Exponent `k` such that the phase equals `i^k`, in `0..4`.
    pub fn exp(self) -> u32 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    // i^a * i^b = i^(a+b): multiplying phases adds their exponents.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exp(self.exp() + rhs.exp())
    }
}

/// Tensor product of single-qubit Pauli factors on a fixed number of qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliWord {
    /// Identity word on `n` qubits (`n <= 64`).
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: 64,
                context: "a pauli word",
            });
        }
        Ok(Self { n, x: 0, z: 0 })
    }

    /// Word with `letter` on qubit `q` and identity elsewhere.
    pub fn single(n: usize, q: usize, letter: PauliLetter) -> Result<Self> {
        Self::identity(n)?.with_letter(q, letter)
    }

    /// Word built from an explicit letter list (qubit 0 first).
    pub fn from_letters(letters: &[PauliLetter]) -> Result<Self> {
        let mut w = Self::identity(letters.len())?;
        for (q, &l) in letters.iter().enumerate() {
            w = w.with_letter(q, l)?;
        }
        Ok(w)
    }

    /// Number of qubits the word acts on (including identity factors).
    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Letter on qubit `q`.
    pub fn letter(&self, q: usize) -> Result<PauliLetter> {
        self.check_qubit(q)?;
        Ok(PauliLetter::from_bits(
            self.x >> q & 1 == 1,
            self.z >> q & 1 == 1,
        ))
    }

    /// Copy of the word with the letter on qubit `q` replaced.
    pub fn with_letter(&self, q: usize, letter: PauliLetter) -> Result<Self> {
        self.check_qubit(q)?;
        let (bx, bz) = letter.bits();
        let mut w = *self;
        w.x = (w.x & !(1 << q)) | (u64::from(bx) << q);
        w.z = (w.z & !(1 << q)) | (u64::from(bz) << q);
        Ok(w)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange {
                qubit: q,
                qubits: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Mask with bit `q` set when qubit `q` carries a non-identity letter.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Qubits carrying non-identity letters, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.support_mask() >> q & 1 == 1)
            .collect()
    }

    pub(crate) fn x_mask(&self) -> u64 {
        self.x
    }

    /// Product `self * other` as a phase and a plain word.
    ///
    /// Phases follow the cyclic rule XY = iZ, YZ = iX, ZX = iY (and the
    /// conjugates in reverse order).
    pub fn multiply(&self, other: &Self) -> Result<(Phase, Self)> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut exp: u32 = 0;
        // Only qubits where both letters are non-identity can contribute a
        // phase.
        let mut mask = (self.x | self.z) & (other.x | other.z);
        while mask != 0 {
            let q = mask.trailing_zeros() as u64;
            mask &= mask - 1;
            let a = PauliLetter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1);
            let b = PauliLetter::from_bits(other.x >> q & 1 == 1, other.z >> q & 1 == 1);
            exp += match (a, b) {
                (PauliLetter::X, PauliLetter::Y)
                | (PauliLetter::Y, PauliLetter::Z)
                | (PauliLetter::Z, PauliLetter::X) => 1,
                (PauliLetter::Y, PauliLetter::X)
                | (PauliLetter::Z, PauliLetter::Y)
                | (PauliLetter::X, PauliLetter::Z) => 3,
                _ => 0, // equal letters square to identity with phase +1
            };
        }
        let word = Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        Ok((Phase::from_exp(exp), word))
    }

    /// Whether the two words commute (true) or anticommute (false).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let sym = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(sym.is_multiple_of(2))
    }

    /// Phase `phi` such that `W |b> = phi |b ^ x>` for the computational
    /// basis state with occupation mask `b` (bit `q` = value of qubit `q`).
    pub fn phase_at(&self, basis: u64) -> Complex64 {
        Phase::from_exp(self.phase_exp_at(basis)).to_complex()
    }

    /// Exponent of `i` in [`Self::phase_at`].
    pub fn phase_exp_at(&self, basis: u64) -> u32 {
        // Each Y contributes a factor i * (that qubit's Z sign); each Z
        // contributes the sign (-1)^{bit}.  Writing Y = iXZ and applying Z
        // before X gives i^{#Y} * (-1)^{|basis & z|}.
        let ny = (self.x & self.z).count_ones();
        let flips = (basis & self.z).count_ones();
        // i^{ny} * (-1)^{flips} = i^{ny + 2*flips}
        ny + 2 * (flips & 1)
    }

    /// Same word on `new_n >= n` qubits, identity on the added qubits.
    pub fn extended(&self, new_n: usize) -> Result<Self> {
        if new_n < self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: new_n,
            });
        }
        if new_n > 64 {
            return Err(Error::TooManyQubits {
                qubits: new_n,
                cap: 64,
                context: "a pauli word",
            });
        }
        Ok(Self {
            n: new_n,
            x: self.x,
            z: self.z,
        })
    }

    /// Word on `new_n` qubits with qubit `q` of `self` moved to
    /// `mapping[q]`.  Unmapped target qubits become identity.
    pub fn map_qubits(&self, mapping: &[usize], new_n: usize) -> Result<Self> {
        if mapping.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: mapping.len(),
            });
        }
        let mut w = PauliWord::identity(new_n)?;
        for (q, &target) in mapping.iter().enumerate() {
            let l = self.letter(q)?;
            if l != PauliLetter::I {
                w = w.with_letter(target, l)?;
            }
        }
        Ok(w)
    }

    /// Dense matrix form; rows/columns are computational basis states whose
    /// index bit `q` is the value of qubit `q`.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > MATRIX_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: self.n,
                cap: MATRIX_QUBIT_CAP,
                context: "dense matrix form",
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..dim as u64 {
            let out = (b ^ self.x) as usize;
            m[(out, b as usize)] = self.phase_at(b);
        }
        Ok(m)
    }

    /// All `(x, z)` mask pairs as an iterator over words, used by the dense
    /// decomposition. Qubit count fixed to `n`.
    fn enumerate(n: usize) -> impl Iterator<Item = PauliWord> {
        let dim = 1u64 << n;
        (0..dim).flat_map(move |x| (0..dim).map(move |z| PauliWord { n, x, z }))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let l = PauliLetter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1);
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({self})")
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Option<Vec<PauliLetter>> = s.chars().map(PauliLetter::from_char).collect();
        let letters = letters.ok_or_else(|| Error::WordParse(s.to_string()))?;
        if letters.is_empty() {
            return Err(Error::WordParse(s.to_string()));
        }
        Self::from_letters(&letters)
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliWord {
    /// Lexicographic order on letters with I < X < Y < Z, qubit 0 most
    /// significant; words on fewer qubits sort first.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.n != other.n {
            return self.n.cmp(&other.n);
        }
        for q in 0..self.n {
            let a = PauliLetter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1);
            let b = PauliLetter::from_bits(other.x >> q & 1 == 1, other.z >> q & 1 == 1);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Real linear combination of Pauli words — a Hermitian operator.
///
/// The term list is always normalised: sorted by word, duplicates merged,
/// and coefficients below [`COEFF_EPS`] dropped.  An empty list is the zero
/// operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliWord)>,
}

impl PauliSum {
    /// Zero operator on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: 64,
                context: "a pauli sum",
            });
        }
        Ok(Self { n, terms: vec![] })
    }

    /// Sum built from `(coefficient, word)` pairs; all words must act on `n`
    /// qubits.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (f64, PauliWord)>) -> Result<Self> {
        let mut sum = Self::zero(n)?;
        let mut list: Vec<(f64, PauliWord)> = Vec::new();
        for (c, w) in terms {
            if w.qubit_count() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: w.qubit_count(),
                });
            }
            list.push((c, w));
        }
        list.sort_by_key(|a| a.1);
        for (c, w) in list {
            match sum.terms.last_mut() {
                Some((lc, lw)) if *lw == w => *lc += c,
                _ => sum.terms.push((c, w)),
            }
        }
        sum.terms.retain(|(c, _)| c.abs() >= COEFF_EPS);
        Ok(sum)
    }

    /// Convenience constructor from string words, mostly for tests and
    /// builders: `PauliSum::parse_terms(2, &[(1.0, "ZZ"), (0.5, "XI")])`.
    pub fn parse_terms(n: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let mut list = Vec::with_capacity(terms.len());
        for (c, s) in terms {
            list.push((*c, s.parse::<PauliWord>()?));
        }
        Self::from_terms(n, list)
    }

    /// Single-term sum.
    pub fn single(c: f64, word: PauliWord) -> Result<Self> {
        Self::from_terms(word.qubit_count(), [(c, word)])
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Normalised `(coefficient, word)` slice.
    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    /// Terms excluding any identity word.  Gradient constructions insert one
    /// controlled or rotated gate per non-identity term; identity terms only
    /// shift the operator's spectrum.
    pub fn non_identity_terms(&self) -> impl Iterator<Item = &(f64, PauliWord)> {
        self.terms.iter().filter(|(_, w)| !w.is_identity())
    }

    /// Number of non-identity terms.
    pub fn non_identity_count(&self) -> usize {
        self.non_identity_terms().count()
    }

    /// Coefficient of the identity word (0 when absent).
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|(_, w)| w.is_identity())
            .map(|(c, _)| *c)
            .unwrap_or(0.0)
    }

    /// Sum of `self` and `other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Self::from_terms(self.n, self.terms.iter().chain(&other.terms).cloned())
    }

    /// `factor * self`.
    pub fn scale(&self, factor: f64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(c, w)| (c * factor, *w)))
            .expect("scaling preserves qubit counts")
    }

    /// Same operator on `new_n >= n` qubits.
    pub fn extended(&self, new_n: usize) -> Result<Self> {
        Self::from_terms(
            new_n,
            self.terms
                .iter()
                .map(|(c, w)| w.extended(new_n).map(|w| (*c, w)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Operator with qubit `q` relabelled to `mapping[q]`, on `new_n` qubits.
    pub fn map_qubits(&self, mapping: &[usize], new_n: usize) -> Result<Self> {
        Self::from_terms(
            new_n,
            self.terms
                .iter()
                .map(|(c, w)| w.map_qubits(mapping, new_n).map(|w| (*c, w)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Union of the supports of all terms, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mask = self
            .terms
            .iter()
            .fold(0u64, |m, (_, w)| m | w.support_mask());
        (0..self.n).filter(|&q| mask >> q & 1 == 1).collect()
    }

    /// The same operator re-indexed onto its support qubits only, together
    /// with the support list.  Useful for spectra: tensoring with identity
    /// does not change the set of eigenvalues.
    pub fn restricted_to_support(&self) -> Result<(PauliSum, Vec<usize>)> {
        let support = self.support();
        if support.is_empty() {
            // Identity/zero operator: represent on one qubit.
            let id = PauliWord::identity(1)?;
            let sum = if self.terms.is_empty() {
                PauliSum::zero(1)?
            } else {
                PauliSum::single(self.identity_coeff(), id)?
            };
            return Ok((sum, support));
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (new_q, &q) in support.iter().enumerate() {
            inverse[q] = new_q;
        }
        let m = support.len();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, w) in &self.terms {
            let mut nw = PauliWord::identity(m)?;
            for &q in &support {
                let l = w.letter(q)?;
                if l != PauliLetter::I {
                    nw = nw.with_letter(inverse[q], l)?;
                }
            }
            terms.push((*c, nw));
        }
        Ok((PauliSum::from_terms(m, terms)?, support))
    }

    /// Whether every pair of terms commutes.
    pub fn pairwise_commuting(&self) -> Result<bool> {
        for (i, (_, a)) in self.terms.iter().enumerate() {
            for (_, b) in &self.terms[i + 1..] {
                if !a.commutes(b)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Dense matrix form (see [`PauliWord::to_matrix`] for conventions).
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > MATRIX_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: self.n,
                cap: MATRIX_QUBIT_CAP,
                context: "dense matrix form",
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (c, w) in &self.terms {
            for b in 0..dim as u64 {
                let out = (b ^ w.x_mask()) as usize;
                m[(out, b as usize)] += w.phase_at(b) * Complex64::new(*c, 0.0);
            }
        }
        Ok(m)
    }

    /// Pauli decomposition of a dense Hermitian matrix.
    ///
    /// The qubit count is inferred from the dimension.  Errors if the matrix
    /// is not square with power-of-two size, exceeds [`MATRIX_QUBIT_CAP`]
    /// qubits, or deviates from Hermiticity by more than
    /// [`HERMITICITY_EPS`].  The reconstruction `sum.to_matrix()` matches the
    /// input to the same tolerance.
    pub fn decompose(m: &DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows == 0 || !rows.is_power_of_two() {
            return Err(Error::MatrixShape { rows, cols });
        }
        let n = rows.trailing_zeros() as usize;
        if n == 0 {
            return Err(Error::MatrixShape { rows, cols });
        }
        if n > MATRIX_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: MATRIX_QUBIT_CAP,
                context: "dense matrix decomposition",
            });
        }
        let mut residue = 0.0f64;
        for r in 0..rows {
            for c in r..cols {
                let d = (m[(r, c)] - m[(c, r)].conj()).norm();
                residue = residue.max(d);
            }
        }
        if residue > HERMITICITY_EPS {
            return Err(Error::NonHermitian { residue });
        }
        let dim = rows as u64;
        let mut terms = Vec::new();
        for w in PauliWord::enumerate(n) {
            // tr(W * M) visits one entry of M per column because W has a
            // single non-zero per row: (W M)_{bb} = phi(b ^ x) M_{b ^ x, b}.
            let mut tr = Complex64::new(0.0, 0.0);
            for b in 0..dim {
                let r = b ^ w.x_mask();
                tr += w.phase_at(r) * m[(r as usize, b as usize)];
            }
            let coeff = tr / Complex64::new(rows as f64, 0.0);
            if coeff.norm() >= COEFF_EPS {
                terms.push((coeff.re, w));
            }
        }
        Self::from_terms(n, terms)
    }

    /// Distinct eigenvalues, ascending, merged within [`SPECTRUM_EPS`].
    ///
    /// The operator is first restricted to its support (identity factors do
    /// not change the eigenvalue set), which must then fit the dense cap.
    pub fn eigen_spectrum(&self) -> Result<Vec<f64>> {
        if self.terms.is_empty() {
            return Ok(vec![0.0]);
        }
        let (restricted, support) = self.restricted_to_support()?;
        if support.is_empty() {
            return Ok(vec![self.identity_coeff()]);
        }
        let m = restricted.to_matrix()?;
        let mut eigs = crate::dense::hermitian_eigenvalues(&m);
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut distinct: Vec<f64> = Vec::new();
        for e in eigs {
            match distinct.last() {
                Some(last) if (e - last).abs() <= SPECTRUM_EPS => {}
                _ => distinct.push(e),
            }
        }
        Ok(distinct)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, w)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{c:+} {w}")?;
            } else {
                write!(f, " {c:+} {w}")?;
            }
        }
        Ok(())
    }
}

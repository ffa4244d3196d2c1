//! Exact integer and modular linear algebra.
//!
//! Everything here is dense and desk-scale: Howell forms over ℤ_d (the
//! row-canonical form that stays correct when d is not prime), kernels and
//! affine solving mod d, integer Smith normal form with recorded unimodular
//! transforms, and finite-abelian-group structure extraction.

use serde::{Deserialize, Serialize};

use crate::error::ChiralError;

// ---------------------------------------------------------------------------
// matrices over ℤ_d, u8 entries
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMat {
    pub d: u32,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u8>,
}

impl ModMat {
    pub fn zeros(d: u32, rows: usize, cols: usize) -> Self {
        assert!(d >= 2 && d <= 64);
        ModMat {
            d,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(d: u32, rows: &[Vec<u8>]) -> Self {
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = Self::zeros(d, rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v % d as u8);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v % self.d as u8;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u8] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row.iter().map(|&v| v % self.d as u8));
        self.rows += 1;
    }

    /// self · v over ℤ_d.
    pub fn matvec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols);
        let d = self.d as u32;
        (0..self.rows)
            .map(|i| {
                let mut acc: u32 = 0;
                let row = self.row(i);
                for (a, b) in row.iter().zip(v) {
                    acc += *a as u32 * *b as u32;
                    if acc >= u32::MAX / 2 {
                        acc %= d;
                    }
                }
                (acc % d) as u8
            })
            .collect()
    }

    /// row_i ← row_i + f·row_k (two distinct rows).
    fn row_addmul(&mut self, i: usize, k: usize, f: u8) {
        if f == 0 {
            return;
        }
        let d = self.d as u16;
        let f = f as u16;
        let (lo, hi, swap) = if i < k { (i, k, false) } else { (k, i, true) };
        let (a, b) = self.data.split_at_mut(hi * self.cols);
        let lo_row = &mut a[lo * self.cols..lo * self.cols + self.cols];
        let hi_row = &mut b[..self.cols];
        let (dst, src) = if swap { (hi_row, &*lo_row) } else { (lo_row, &*hi_row) };
        for (x, y) in dst.iter_mut().zip(src.iter()) {
            *x = ((*x as u16 + f * *y as u16) % d) as u8;
        }
    }

    fn row_scale(&mut self, i: usize, f: u8) {
        let d = self.d as u16;
        for x in self.row_mut(i) {
            *x = ((*x as u16 * f as u16) % d) as u8;
        }
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, k * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + k);
        }
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A unit u of ℤ_d with u·a ≡ gcd(a, d) (mod d). d ≤ 64, so search is fine.
fn normalizing_unit(a: u8, d: u32) -> u8 {
    let g = gcd(a as u32, d);
    for u in 1..d {
        if gcd(u, d) == 1 && (u * a as u32) % d == g % d {
            return u as u8;
        }
    }
    unreachable!("a normalizing unit always exists in Z_d");
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Row-canonical (Howell) form over ℤ_d. Pivots divide d, entries above a
/// pivot are reduced modulo it, and for non-prime d the saturation rows
/// (d/p)·row are folded in so that the row set is closed under leading-zero
/// truncation. Zero rows are dropped.
pub struct HowellForm {
    pub mat: ModMat,
    /// pivot column of each row, strictly increasing
    pub pivot_cols: Vec<usize>,
}

pub fn howell(input: &ModMat) -> HowellForm {
    use rayon::prelude::*;
    let d = input.d;
    let dd = d as i64;
    let saturate = !is_prime(d);
    let cols = input.cols;

    let mut active: Vec<Vec<u8>> = (0..input.rows).map(|r| input.row(r).to_vec()).collect();
    let mut done: Vec<Vec<u8>> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();

    for col in 0..cols {
        // pick the pivot with minimal gcd(entry, d); Bezout-merge rows whose
        // entries it does not divide (strictly reduces the pivot gcd)
        let mut pivot_row: Option<Vec<u8>> = None;
        loop {
            let mut best: Option<(usize, u32)> = None;
            for (r, row) in active.iter().enumerate() {
                let v = row[col];
                if v != 0 {
                    let g = gcd(v as u32, d);
                    if best.map(|(_, bg)| g < bg).unwrap_or(true) {
                        best = Some((r, g));
                    }
                }
            }
            let Some((rbest, gbest)) = best else {
                pivot_row = None;
                break;
            };
            let mut prow = active.swap_remove(rbest);
            // normalize so the pivot entry equals its gcd with d
            let u = normalizing_unit(prow[col], d);
            if u != 1 {
                for x in prow.iter_mut() {
                    *x = ((*x as u16 * u as u16) % d as u16) as u8;
                }
            }
            debug_assert_eq!(prow[col] as u32, gbest);
            // find a row the pivot does not divide, if any
            let bad = active
                .iter()
                .position(|row| row[col] != 0 && row[col] as u32 % gbest != 0);
            match bad {
                None => {
                    pivot_row = Some(prow);
                    break;
                }
                Some(rb) => {
                    // Bezout merge: replace both rows; the new pivot candidate
                    // has column entry gcd(gbest, row[col]) < gbest
                    let other = &mut active[rb];
                    let (g, s, t) = ext_gcd(gbest as i64, other[col] as i64);
                    let m1 = -(other[col] as i64 / g);
                    let m2 = gbest as i64 / g;
                    for c in 0..cols {
                        let x = prow[c] as i64;
                        let y = other[c] as i64;
                        prow[c] = (s * x + t * y).rem_euclid(dd) as u8;
                        other[c] = (m1 * x + m2 * y).rem_euclid(dd) as u8;
                    }
                    active.push(prow);
                }
            }
        }
        let Some(prow) = pivot_row else { continue };
        let g = prow[col] as u32; // divides d, divides every entry in col

        // parallel elimination: every active row's entry is divisible by g
        let dg = (d / g) as i64;
        active.par_iter_mut().for_each(|row| {
            let v = row[col] as i64;
            if v != 0 {
                let f = (-(v / g as i64)).rem_euclid(dg) as u16;
                if f != 0 {
                    for (x, p) in row.iter_mut().zip(prow.iter()) {
                        *x = ((*x as u16 + f * *p as u16) % d as u16) as u8;
                    }
                }
            }
        });

        // saturation row keeps the span closed under truncation
        if saturate && g != 1 {
            let f = (d / g) as u16;
            let sat: Vec<u8> = prow.iter().map(|&v| ((v as u16 * f) % d as u16) as u8).collect();
            if sat.iter().any(|&v| v != 0) {
                active.push(sat);
            }
        }
        pivot_cols.push(col);
        done.push(prow);
        if active.is_empty() {
            break;
        }
    }

    // reduce entries above each pivot modulo the pivot value, in increasing
    // pivot order so earlier columns stay reduced (canonical form)
    for i in 0..done.len() {
        let col = pivot_cols[i];
        let p = done[i][col] as u32;
        let (head, tail) = done.split_at_mut(i);
        let prow = &tail[0];
        head.par_iter_mut().for_each(|row| {
            let v = row[col] as u32;
            let q = v / p;
            if q != 0 {
                let f = ((d - (q % d)) % d) as u16;
                for (x, pv) in row.iter_mut().zip(prow.iter()) {
                    *x = ((*x as u16 + f * *pv as u16) % d as u16) as u8;
                }
            }
        });
    }

    let mut mat = ModMat::zeros(d, 0, cols);
    for row in &done {
        mat.push_row(row);
    }
    HowellForm { mat, pivot_cols }
}

impl HowellForm {
    pub fn rank(&self) -> usize {
        self.mat.rows
    }

    /// Reduce v against the form; returns the residue and the coefficients
    /// used (residue zero ⇔ v lies in the row span).
    pub fn reduce(&self, v: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let d = self.mat.d as i64;
        let mut res: Vec<i64> = v.iter().map(|&x| x as i64).collect();
        let mut coeff = vec![0u8; self.mat.rows];
        for (i, &col) in self.pivot_cols.iter().enumerate() {
            let val = res[col].rem_euclid(d);
            if val == 0 {
                continue;
            }
            let p = self.mat.get(i, col) as i64;
            if val % p != 0 {
                continue; // leaves a nonzero residue at this column
            }
            let f = val / p;
            coeff[i] = f.rem_euclid(d) as u8;
            for c in 0..self.mat.cols {
                res[c] = (res[c] - f * self.mat.get(i, c) as i64).rem_euclid(d);
            }
        }
        (res.iter().map(|&x| x as u8).collect(), coeff)
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }
}

// ---------------------------------------------------------------------------
// bit-packed matrices over ℤ_2
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub struct BitMat {
    pub rows: usize,
    pub cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMat {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_mod(m: &ModMat) -> Self {
        assert_eq!(m.d, 2);
        let mut b = Self::zeros(m.rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                if m.get(r, c) != 0 {
                    b.set(r, c, true);
                }
            }
        }
        b
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let w = self.words;
        let (dst_row, src_row): (&mut [u64], &[u64]) = if dst < src {
            let (x, y) = self.data.split_at_mut(src * w);
            (&mut x[dst * w..(dst + 1) * w], &y[..w])
        } else {
            let (x, y) = self.data.split_at_mut(dst * w);
            (&mut y[..w], &x[src * w..(src + 1) * w])
        };
        for (x, y) in dst_row.iter_mut().zip(src_row.iter()) {
            *x ^= *y;
        }
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for w in 0..self.words {
            self.data.swap(i * self.words + w, k * self.words + w);
        }
    }

    fn row_is_zero_upto(&self, r: usize, cols: usize) -> bool {
        for c in 0..cols {
            if self.get(r, c) {
                return false;
            }
        }
        true
    }
}

/// Row echelon over GF(2), eliminating above and below; returns pivot cols.
/// Only the first `active_cols` columns are searched for pivots (the rest act
/// as an augmented block carried along).
fn bit_rref(m: &mut BitMat, active_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..active_cols {
        let mut found = None;
        for r in top..m.rows {
            if m.get(r, col) {
                found = Some(r);
                break;
            }
        }
        let Some(r) = found else { continue };
        m.swap_rows(top, r);
        for rr in 0..m.rows {
            if rr != top && m.get(rr, col) {
                m.xor_rows(rr, top);
            }
        }
        pivots.push(col);
        top += 1;
        if top == m.rows {
            break;
        }
    }
    pivots
}

// ---------------------------------------------------------------------------
// kernels and affine solving mod d
// ---------------------------------------------------------------------------

/// Precomputed solver for M·x ≡ b (mod d), column-space form.
///
/// Built from the Howell form of [Mᵀ | I]: each row is (M·c, c) for a
/// recorded combination c, so solving is reduction of (b, 0).
pub enum ColSolver {
    Bits {
        rows: usize, // rows of M
        cols: usize, // cols of M
        rref: BitMat,
        pivots: Vec<usize>,
    },
    Generic {
        rows: usize,
        cols: usize,
        howell: HowellForm,
    },
}

impl ColSolver {
    pub fn new(m: &ModMat) -> ColSolver {
        if m.d == 2 {
            // [Mᵀ | I] bit packed
            let mut a = BitMat::zeros(m.cols, m.rows + m.cols);
            for j in 0..m.cols {
                for i in 0..m.rows {
                    if m.get(i, j) != 0 {
                        a.set(j, i, true);
                    }
                }
                a.set(j, m.rows + j, true);
            }
            let pivots = bit_rref(&mut a, m.rows);
            ColSolver::Bits {
                rows: m.rows,
                cols: m.cols,
                rref: a,
                pivots,
            }
        } else {
            let mut a = ModMat::zeros(m.d, m.cols, m.rows + m.cols);
            for j in 0..m.cols {
                for i in 0..m.rows {
                    a.set(j, i, m.get(i, j));
                }
                a.set(j, m.rows + j, 1);
            }
            let hw = howell(&a);
            ColSolver::Generic {
                rows: m.rows,
                cols: m.cols,
                howell: hw,
            }
        }
    }

    /// One solution of M·x = b, or None when infeasible.
    pub fn solve(&self, b: &[u8]) -> Option<Vec<u8>> {
        match self {
            ColSolver::Bits {
                rows,
                cols,
                rref,
                pivots,
            } => {
                assert_eq!(b.len(), *rows);
                let words = rref.words;
                let mut acc = vec![0u64; words];
                let mut res: Vec<bool> = b.iter().map(|&v| v % 2 == 1).collect();
                for (i, &col) in pivots.iter().enumerate() {
                    if res[col] {
                        for w in 0..words {
                            acc[w] ^= rref.data[i * words + w];
                        }
                        // subtract the row's M-part from the residue
                        for c in 0..*rows {
                            if rref.get(i, c) {
                                res[c] ^= true;
                            }
                        }
                    }
                }
                if res.iter().any(|&v| v) {
                    return None;
                }
                let mut x = vec![0u8; *cols];
                for j in 0..*cols {
                    let c = *rows + j;
                    if acc[c / 64] >> (c % 64) & 1 == 1 {
                        x[j] = 1;
                    }
                }
                Some(x)
            }
            ColSolver::Generic { rows, cols, howell } => {
                assert_eq!(b.len(), *rows);
                let d = howell.mat.d;
                let mut v = vec![0u8; *rows + *cols];
                v[..*rows].copy_from_slice(b);
                let (res, coeff) = howell.reduce(&v);
                if res[..*rows].iter().any(|&x| x != 0) {
                    return None;
                }
                // v − Σ μ_i row_i = (0, w) ⇒ x = −w; w sits in the residue tail
                let mut x = vec![0u8; *cols];
                let _ = coeff;
                for j in 0..*cols {
                    let w = res[*rows + j] as i64;
                    x[j] = (-w).rem_euclid(d as i64) as u8;
                }
                Some(x)
            }
        }
    }

    /// Generating set of {x : M·x = 0} as a ℤ_d-module.
    pub fn kernel_basis(&self) -> Vec<Vec<u8>> {
        match self {
            ColSolver::Bits { rows, cols, rref, .. } => {
                let mut out = Vec::new();
                for r in 0..rref.rows {
                    if rref.row_is_zero_upto(r, *rows) {
                        let mut v = vec![0u8; *cols];
                        let mut nonzero = false;
                        for j in 0..*cols {
                            if rref.get(r, rows + j) {
                                v[j] = 1;
                                nonzero = true;
                            }
                        }
                        if nonzero {
                            out.push(v);
                        }
                    }
                }
                out
            }
            ColSolver::Generic { rows, cols, howell } => {
                let mut out = Vec::new();
                for r in 0..howell.mat.rows {
                    if howell.pivot_cols[r] >= *rows {
                        let row = howell.mat.row(r);
                        out.push(row[*rows..*rows + *cols].to_vec());
                    }
                }
                out
            }
        }
    }
}

/// Basis of {v : M·v ≡ 0 mod d}.
pub fn kernel_mod(m: &ModMat) -> Vec<Vec<u8>> {
    ColSolver::new(m).kernel_basis()
}

/// One solution plus the kernel description, or infeasible.
pub struct AffineSolution {
    pub particular: Vec<u8>,
    pub kernel: Vec<Vec<u8>>,
}

pub fn solve_mod(m: &ModMat, b: &[u8]) -> Result<AffineSolution, ChiralError> {
    let solver = ColSolver::new(m);
    let particular = solver.solve(b).ok_or(ChiralError::Infeasible)?;
    Ok(AffineSolution {
        particular,
        kernel: solver.kernel_basis(),
    })
}

/// Row-space membership with witness: is v ∈ rowspan(G)?
pub struct RowSpace {
    howell: HowellForm,
}

impl RowSpace {
    pub fn new(gens: &ModMat) -> Self {
        RowSpace { howell: howell(gens) }
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.howell.contains(v)
    }

    pub fn rank(&self) -> usize {
        self.howell.rank()
    }

    /// Canonical row set; equal modules give equal canonical rows.
    pub fn canonical_rows(&self) -> Vec<&[u8]> {
        (0..self.howell.mat.rows).map(|r| self.howell.mat.row(r)).collect()
    }
}

// ---------------------------------------------------------------------------
// integer matrices and Smith normal form
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            m.data[i * ncols..(i + 1) * ncols].copy_from_slice(r);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i128) {
        self.data[r * self.cols + c] = v;
    }

    pub fn matmul(&self, other: &IntMatrix) -> Result<IntMatrix, ChiralError> {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.checked_mul(other.get(k, j)).ok_or(ChiralError::Overflow)?;
                    let v = out.get(i, j).checked_add(prod).ok_or(ChiralError::Overflow)?;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    fn row_addmul(&mut self, dst: usize, src: usize, f: i128) -> Result<(), ChiralError> {
        if f == 0 {
            return Ok(());
        }
        for c in 0..self.cols {
            let v = self
                .get(src, c)
                .checked_mul(f)
                .and_then(|p| self.get(dst, c).checked_add(p))
                .ok_or(ChiralError::Overflow)?;
            self.set(dst, c, v);
        }
        Ok(())
    }

    fn col_addmul(&mut self, dst: usize, src: usize, f: i128) -> Result<(), ChiralError> {
        if f == 0 {
            return Ok(());
        }
        for r in 0..self.rows {
            let v = self
                .get(r, src)
                .checked_mul(f)
                .and_then(|p| self.get(r, dst).checked_add(p))
                .ok_or(ChiralError::Overflow)?;
            self.set(r, dst, v);
        }
        Ok(())
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i != k {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, k * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, k: usize) {
        if i != k {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + i, r * self.cols + k);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = self.get(i, c);
            self.set(i, c, -v);
        }
    }

    fn negate_col(&mut self, i: usize) {
        for r in 0..self.rows {
            let v = self.get(r, i);
            self.set(r, i, -v);
        }
    }
}

pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// nonzero diagonal entries, divisibility chain
    pub divisors: Vec<i128>,
}

/// Smith normal form with unimodular U, V such that U·M·V = D. Pivoting is
/// by smallest nonzero magnitude to bound entry growth.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithDecomposition, ChiralError> {
    let mut a = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);

    let mut t = 0usize;
    while t < n {
        // find smallest-magnitude nonzero entry in the remaining block
        let mut pivot: Option<(usize, usize, i128)> = None;
        for r in t..a.rows {
            for c in t..a.cols {
                let val = a.get(r, c);
                if val != 0 && pivot.map(|(_, _, p)| val.abs() < p.abs()).unwrap_or(true) {
                    pivot = Some((r, c, val));
                }
            }
        }
        let Some((pr, pc, _)) = pivot else { break };
        a.swap_rows(t, pr);
        u.swap_rows(t, pr);
        a.swap_cols(t, pc);
        v.swap_cols(t, pc);

        loop {
            let p = a.get(t, t);
            let mut clean = true;
            // clear column t
            for r in (t + 1)..a.rows {
                let val = a.get(r, t);
                if val != 0 {
                    let q = val.div_euclid(p);
                    a.row_addmul(r, t, -q)?;
                    u.row_addmul(r, t, -q)?;
                    if a.get(r, t) != 0 {
                        // remainder smaller than |p|: swap up and restart
                        a.swap_rows(t, r);
                        u.swap_rows(t, r);
                        clean = false;
                        break;
                    }
                }
            }
            if !clean {
                continue;
            }
            // clear row t
            for c in (t + 1)..a.cols {
                let val = a.get(t, c);
                if val != 0 {
                    let q = val.div_euclid(p);
                    a.col_addmul(c, t, -q)?;
                    v.col_addmul(c, t, -q)?;
                    if a.get(t, c) != 0 {
                        a.swap_cols(t, c);
                        v.swap_cols(t, c);
                        clean = false;
                        break;
                    }
                }
            }
            if clean {
                break;
            }
        }
        t += 1;
    }

    // make diagonal non-negative
    for i in 0..n {
        if a.get(i, i) < 0 {
            a.negate_row(i);
            u.negate_row(i);
        }
    }
    // enforce divisibility chain d_i | d_{i+1}
    loop {
        let mut fixed = true;
        for i in 0..n.saturating_sub(1) {
            let x = a.get(i, i);
            let y = a.get(i + 1, i + 1);
            if x != 0 && y != 0 && y % x != 0 {
                // standard 2×2 fix: bring gcd(x, y) to position i
                // column i+1 += column i ; then re-reduce the 2×2 block
                a.col_addmul(i, i + 1, 1)?;
                v.col_addmul(i, i + 1, 1)?;
                // now a[i][i] = x, a[i+1][i] = y
                let (g, s, tt) = ext_gcd_i128(x, y);
                // row i ← s·row i + t·row (i+1)
                // use a temporary unimodular 2×2: [[s, tt], [-y/g, x/g]]
                let (r0, r1) = (i, i + 1);
                apply_row_2x2(&mut a, r0, r1, s, tt, -y / g, x / g)?;
                apply_row_2x2(&mut u, r0, r1, s, tt, -y / g, x / g)?;
                // clear the off-diagonals created in column i and row i
                let p = a.get(i, i);
                debug_assert_eq!(p.abs(), g.abs());
                for r in (i + 1)..a.rows {
                    let val = a.get(r, i);
                    if val != 0 {
                        let q = val / p;
                        a.row_addmul(r, i, -q)?;
                        u.row_addmul(r, i, -q)?;
                    }
                }
                for c in (i + 1)..a.cols {
                    let val = a.get(i, c);
                    if val != 0 {
                        let q = val / p;
                        a.col_addmul(c, i, -q)?;
                        v.col_addmul(c, i, -q)?;
                    }
                }
                if a.get(i, i) < 0 {
                    a.negate_row(i);
                    u.negate_row(i);
                }
                if a.get(i + 1, i + 1) < 0 {
                    a.negate_row(i + 1);
                    u.negate_row(i + 1);
                }
                fixed = false;
            }
        }
        if fixed {
            break;
        }
    }

    let divisors = (0..n).map(|i| a.get(i, i)).filter(|&x| x != 0).collect();
    Ok(SmithDecomposition {
        u,
        d: a,
        v,
        divisors,
    })
}

fn ext_gcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd_i128(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

fn apply_row_2x2(
    m: &mut IntMatrix,
    r0: usize,
    r1: usize,
    a: i128,
    b: i128,
    c: i128,
    d: i128,
) -> Result<(), ChiralError> {
    for col in 0..m.cols {
        let x = m.get(r0, col);
        let y = m.get(r1, col);
        let nx = a
            .checked_mul(x)
            .and_then(|p| b.checked_mul(y).and_then(|q| p.checked_add(q)))
            .ok_or(ChiralError::Overflow)?;
        let ny = c
            .checked_mul(x)
            .and_then(|p| d.checked_mul(y).and_then(|q| p.checked_add(q)))
            .ok_or(ChiralError::Overflow)?;
        m.set(r0, col, nx);
        m.set(r1, col, ny);
    }
    Ok(())
}

/// Rank over ℚ by fraction-free (Bareiss) elimination. Independent of the
/// Smith normal form path; used as its cross-check oracle.
pub fn rank_over_q(m: &IntMatrix) -> Result<usize, ChiralError> {
    let mut a = m.clone();
    let mut rank = 0usize;
    let mut prev: i128 = 1;
    for col in 0..a.cols {
        let mut piv = None;
        for r in rank..a.rows {
            if a.get(r, col) != 0 {
                piv = Some(r);
                break;
            }
        }
        let Some(piv) = piv else { continue };
        a.swap_rows(rank, piv);
        let p = a.get(rank, col);
        for r in (rank + 1)..a.rows {
            for c in (col + 1)..a.cols {
                let num = p
                    .checked_mul(a.get(r, c))
                    .and_then(|x| a.get(r, col).checked_mul(a.get(rank, c)).map(|y| (x, y)))
                    .map(|(x, y)| x.checked_sub(y))
                    .flatten()
                    .ok_or(ChiralError::Overflow)?;
                a.set(r, c, num / prev);
            }
            a.set(r, col, 0);
        }
        prev = p;
        rank += 1;
        if rank == a.rows {
            break;
        }
    }
    Ok(rank)
}

// ---------------------------------------------------------------------------
// abelian group structure
// ---------------------------------------------------------------------------

/// Elementary divisors d₁ | d₂ | …, each > 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroupStructure {
    pub divisors: Vec<u32>,
}

impl AbelianGroupStructure {
    pub fn trivial() -> Self {
        AbelianGroupStructure { divisors: vec![] }
    }

    pub fn order(&self) -> u128 {
        self.divisors.iter().map(|&x| x as u128).product()
    }
}

/// Smith normal form over ℤ_d with the inverse column transform tracked:
/// returns (diagonal divisors of d, V⁻¹) where row i of V⁻¹ expresses the
/// i-th diagonal generator of the cokernel in the ambient coordinates.
pub fn snf_mod(input: &ModMat) -> (Vec<u32>, ModMat) {
    let d = input.d;
    let mut a = input.clone();
    let mut vinv = ModMat::zeros(d, a.cols, a.cols);
    for i in 0..a.cols {
        vinv.set(i, i, 1);
    }
    let n = a.rows.min(a.cols);
    let dd = d as i64;

    let mut t = 0usize;
    while t < n {
        // pivot with minimal gcd(entry, d)
        let mut pivot: Option<(usize, usize, u32)> = None;
        for r in t..a.rows {
            for c in t..a.cols {
                let val = a.get(r, c);
                if val != 0 {
                    let g = gcd(val as u32, d);
                    if pivot.map(|(_, _, pg)| g < pg).unwrap_or(true) {
                        pivot = Some((r, c, g));
                    }
                }
            }
        }
        let Some((pr, pc, _)) = pivot else { break };
        a.swap_rows(t, pr);
        a.swap_cols(t, pc);
        vinv.swap_rows(t, pc);

        // normalize pivot to a divisor of d
        let unit = normalizing_unit(a.get(t, t), d);
        a.row_scale(t, unit);

        loop {
            let p = a.get(t, t) as i64;
            let mut again = false;
            for r in (t + 1)..a.rows {
                let val = a.get(r, t) as i64;
                if val == 0 {
                    continue;
                }
                if val % p == 0 {
                    let f = (-(val / p)).rem_euclid(dd) as u8;
                    a.row_addmul(r, t, f);
                } else {
                    // Bezout combine rows t and r
                    let (g, s, w) = ext_gcd(p, val);
                    let cols = a.cols;
                    let (s, w) = (s.rem_euclid(dd), w.rem_euclid(dd));
                    let (m1, m2) = ((-(val / g)).rem_euclid(dd), (p / g).rem_euclid(dd));
                    for c in 0..cols {
                        let x = a.get(t, c) as i64;
                        let y = a.get(r, c) as i64;
                        a.set(t, c, ((s * x + w * y).rem_euclid(dd)) as u8);
                        a.set(r, c, ((m1 * x + m2 * y).rem_euclid(dd)) as u8);
                    }
                    again = true;
                    break;
                }
            }
            if again {
                continue;
            }
            for c in (t + 1)..a.cols {
                let val = a.get(t, c) as i64;
                if val == 0 {
                    continue;
                }
                if val % p == 0 {
                    let f = (-(val / p)).rem_euclid(dd);
                    // col c ← col c + f·col t; inverse: row t of V⁻¹ −= f·row c
                    for r in 0..a.rows {
                        let nv =
                            (a.get(r, c) as i64 + f * a.get(r, t) as i64).rem_euclid(dd);
                        a.set(r, c, nv as u8);
                    }
                    for k in 0..vinv.cols {
                        let nv = (vinv.get(t, k) as i64 - f * vinv.get(c, k) as i64)
                            .rem_euclid(dd);
                        vinv.set(t, k, nv as u8);
                    }
                } else {
                    let (g, s, w) = ext_gcd(p, val);
                    let (s, w) = (s.rem_euclid(dd), w.rem_euclid(dd));
                    let (m1, m2) = ((-(val / g)).rem_euclid(dd), (p / g).rem_euclid(dd));
                    // cols (t, c) ← (s·t + w·c, m1·t + m2·c);
                    // V⁻¹ rows (t, c) ← (m2·t − m1·c, −w·t + s·c)
                    for r in 0..a.rows {
                        let x = a.get(r, t) as i64;
                        let y = a.get(r, c) as i64;
                        a.set(r, t, ((s * x + w * y).rem_euclid(dd)) as u8);
                        a.set(r, c, ((m1 * x + m2 * y).rem_euclid(dd)) as u8);
                    }
                    for k in 0..vinv.cols {
                        let x = vinv.get(t, k) as i64;
                        let y = vinv.get(c, k) as i64;
                        vinv.set(t, k, ((m2 * x - m1 * y).rem_euclid(dd)) as u8);
                        vinv.set(c, k, ((-w * x + s * y).rem_euclid(dd)) as u8);
                    }
                    again = true;
                    break;
                }
            }
            if !again {
                break;
            }
        }

        // ensure pivot divides everything in the remaining block
        let p = a.get(t, t) as u32;
        let mut disturbed = false;
        if p != 1 {
            'outer: for r in (t + 1)..a.rows {
                for c in (t + 1)..a.cols {
                    let val = a.get(r, c) as u32;
                    if val != 0 && val % gcd(p, d) != 0 {
                        a.row_addmul(t, r, 1);
                        disturbed = true;
                        break 'outer;
                    }
                }
            }
        }
        if disturbed {
            continue;
        }
        let unit = normalizing_unit(a.get(t, t), d);
        a.row_scale(t, unit);
        t += 1;
    }

    let mut divisors = Vec::new();
    for i in 0..n {
        let val = a.get(i, i) as u32;
        if val != 0 {
            divisors.push(gcd(val, d));
        }
    }
    (divisors, vinv)
}

/// Structure of ℤ_d^k / rowspan(relations): elementary divisors (> 1) and,
/// for each, a representative coordinate vector in the ambient generators.
pub fn quotient_structure(
    relations: &ModMat,
    k: usize,
    d: u32,
) -> (AbelianGroupStructure, Vec<Vec<u8>>) {
    assert_eq!(relations.cols, k);
    let (snf_divs, vinv) = snf_mod(relations);
    let mut divisors = Vec::new();
    let mut reps = Vec::new();
    for i in 0..k {
        let g = if i < snf_divs.len() { snf_divs[i] } else { 0 };
        // quotient factor ℤ_d/(g): order g if g != 0 else d
        let factor = if g == 0 { d } else { g };
        if factor > 1 {
            divisors.push(factor);
            // generator i of the cokernel in ambient coordinates
            reps.push(vinv.row(i).to_vec());
        }
    }
    // order into a divisibility chain (all factors divide d)
    let mut pairs: Vec<(u32, Vec<u8>)> = divisors.into_iter().zip(reps).collect();
    pairs.sort_by_key(|(g, _)| *g);
    let (divisors, reps): (Vec<u32>, Vec<Vec<u8>>) = pairs.into_iter().unzip();
    (AbelianGroupStructure { divisors }, reps)
}

/// group_structure per the module contract: relations presented as an
/// integer matrix acting on `generators` columns, reduced mod d.
pub fn group_structure(relations: &IntMatrix, d: u32) -> AbelianGroupStructure {
    let mut m = ModMat::zeros(d, relations.rows, relations.cols);
    for r in 0..relations.rows {
        for c in 0..relations.cols {
            m.set(r, c, relations.get(r, c).rem_euclid(d as i128) as u8);
        }
    }
    quotient_structure(&m, relations.cols, d).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn howell_identity() {
        let m = ModMat::from_rows(5, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let h = howell(&m);
        assert_eq!(h.rank(), 3);
    }

    #[test]
    fn kernel_zero_matrix_is_full_space() {
        let m = ModMat::zeros(4, 2, 3);
        let k = kernel_mod(&m);
        let hw = howell(&ModMat::from_rows(4, &k));
        assert_eq!(hw.rank(), 3);
        for v in &k {
            assert!(m.matvec(v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn solve_identity() {
        let m = ModMat::from_rows(7, &[vec![1, 0], vec![0, 1]]);
        let sol = solve_mod(&m, &[3, 5]).unwrap();
        assert_eq!(sol.particular, vec![3, 5]);
    }

    #[test]
    fn solve_2x_eq_1_mod_4_infeasible() {
        let m = ModMat::from_rows(4, &[vec![2]]);
        assert!(solve_mod(&m, &[1]).is_err());
    }

    #[test]
    fn solve_random_mod6_residual_zero() {
        use rand::prelude::*;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let mut m = ModMat::zeros(6, rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, rng.gen_range(0..6));
                }
            }
            // consistent by construction: b = M·x0
            let x0: Vec<u8> = (0..cols).map(|_| rng.gen_range(0..6)).collect();
            let b = m.matvec(&x0);
            let sol = solve_mod(&m, &b).expect("consistent system");
            assert_eq!(m.matvec(&sol.particular), b);
            for kv in &sol.kernel {
                assert!(m.matvec(kv).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn kernel_maximality_mod6() {
        use rand::prelude::*;
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let rows = rng.gen_range(1..5);
            let cols = rng.gen_range(1..5);
            let mut m = ModMat::zeros(6, rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, rng.gen_range(0..6));
                }
            }
            let k = kernel_mod(&m);
            let span = RowSpace::new(&ModMat::from_rows(6, &k.clone()));
            // every vector satisfying the congruence must lie in the span
            // (exhaustive over Z_6^cols for cols ≤ 4 is too big; sample)
            for _ in 0..200 {
                let v: Vec<u8> = (0..cols).map(|_| rng.gen_range(0..6)).collect();
                if m.matvec(&v).iter().all(|&x| x == 0) {
                    assert!(span.contains(&v), "kernel misses {:?}", v);
                }
            }
        }
    }

    #[test]
    fn snf_small() {
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 4]]);
        let s = smith_normal_form(&m).unwrap();
        assert_eq!(s.divisors, vec![2, 4]);
        let prod = s.u.matmul(&m).unwrap().matmul(&s.v).unwrap();
        assert_eq!(prod, s.d);
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(3);
        let s = smith_normal_form(&m).unwrap();
        assert_eq!(s.divisors, vec![1, 1, 1]);
    }

    #[test]
    fn group_structure_free_generator() {
        let relations = IntMatrix::zeros(0, 1);
        let s = group_structure(&relations, 5);
        assert_eq!(s.divisors, vec![5]);
    }

    #[test]
    fn quotient_z4_by_2z4() {
        // ker picture from a 1-qudit d=4 toy: ambient Z4 x Z4 with relation (2,0)
        let rel = ModMat::from_rows(4, &[vec![2, 0]]);
        let (s, _) = quotient_structure(&rel, 2, 4);
        assert_eq!(s.divisors, vec![2, 4]);
    }
}

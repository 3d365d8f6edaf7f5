use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense square matrix over arbitrary-precision rationals. No rounding ever.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> Self {
        RationalMatrix {
            n,
            data: vec![BigRational::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = RationalMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigRational) {
        self.data[i * self.n + j] = value;
    }

    pub fn add_at(&mut self, i: usize, j: usize, delta: &BigRational) {
        let idx = i * self.n + j;
        self.data[idx] = &self.data[idx] + delta;
    }

    pub fn matvec(&self, x: &[BigRational]) -> Vec<BigRational> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j) * &x[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    (a * b).abs() / a.gcd(b)
}

/// Exact `(B^{-1})_{e e}` by fraction-free Gaussian elimination.
pub fn rational_solve(b: &RationalMatrix, e: usize) -> Result<BigRational> {
    Ok(rational_solve_column(b, e)?.swap_remove(e))
}

/// Exact solution column `x` of `B x = 1_e`.
///
/// Rows are scaled to integers, forward elimination runs Bareiss-style with
/// exact divisions, and back-substitution happens over rationals.
pub fn rational_solve_column(b: &RationalMatrix, e: usize) -> Result<Vec<BigRational>> {
    let n = b.order();
    assert!(e < n);
    // integer-scaled augmented matrix [S*B | S*1_e] with per-row scales
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut scale = BigInt::one();
        for j in 0..n {
            scale = lcm_big(&scale, b.get(i, j).denom());
        }
        let mut row: Vec<BigInt> = (0..n)
            .map(|j| {
                let r = b.get(i, j);
                r.numer() * (&scale / r.denom())
            })
            .collect();
        row.push(if i == e { scale } else { BigInt::zero() });
        a.push(row);
    }

    let mut prev_pivot = BigInt::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for r in (col + 1)..n {
            for c in (col + 1)..=n {
                let val = (&pivot * &a[r][c] - &a[r][col] * &a[col][c]) / &prev_pivot;
                a[r][c] = val;
            }
            a[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
    }

    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from(a[i][n].clone());
        for j in (i + 1)..n {
            acc -= BigRational::from(a[i][j].clone()) * &x[j];
        }
        if a[i][i].is_zero() {
            return Err(Error::Singular);
        }
        x[i] = acc / BigRational::from(a[i][i].clone());
    }
    Ok(x)
}

/// Renders a rational as a decimal string with `digits` fractional digits
/// (truncated toward zero).
pub fn decimal_string(r: &BigRational, digits: u32) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let int_part = abs.numer() / abs.denom();
    let rem = abs.numer() - &int_part * abs.denom();
    let scaled = rem * BigInt::from(10u32).pow(digits) / abs.denom();
    let mut frac = scaled.to_string();
    while (frac.len() as u32) < digits {
        frac.insert(0, '0');
    }
    format!("{sign}{int_part}.{frac}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn diagonal_solve() {
        // B = kappa * I: (B^-1)_tt = 1/kappa
        let kappa = 7i64;
        let b = RationalMatrix::from_fn(3, |i, j| if i == j { rat(kappa, 1) } else { rat(0, 1) });
        assert_eq!(rational_solve(&b, 1).unwrap(), rat(1, kappa));
    }

    #[test]
    fn two_by_two_closed_form() {
        // B = [[k, -1], [-1, k]]: (B^-1)_00 = k / (k^2 - 1)
        let k = 5i64;
        let b = RationalMatrix::from_fn(2, |i, j| if i == j { rat(k, 1) } else { rat(-1, 1) });
        assert_eq!(rational_solve(&b, 0).unwrap(), rat(k, k * k - 1));
    }

    #[test]
    fn solution_column_satisfies_system() {
        let entries = [
            [rat(10, 1), rat(-1, 2), rat(0, 1), rat(-1, 3)],
            [rat(-1, 2), rat(8, 1), rat(-2, 1), rat(0, 1)],
            [rat(0, 1), rat(-2, 1), rat(9, 1), rat(-1, 1)],
            [rat(-1, 3), rat(0, 1), rat(-1, 1), rat(7, 1)],
        ];
        let b = RationalMatrix::from_fn(4, |i, j| entries[i][j].clone());
        let x = rational_solve_column(&b, 2).unwrap();
        let back = b.matvec(&x);
        for (i, v) in back.iter().enumerate() {
            let want = if i == 2 { rat(1, 1) } else { rat(0, 1) };
            assert_eq!(*v, want);
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let b = RationalMatrix::from_fn(2, |_, _| rat(1, 1));
        assert_eq!(rational_solve(&b, 0), Err(Error::Singular));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(1, 8), 5), "0.12500");
        assert_eq!(decimal_string(&rat(-22, 7), 4), "-3.1428");
        assert_eq!(
            decimal_string(&BigRational::from_f64(2.0).unwrap(), 2),
            "2.00"
        );
    }
}

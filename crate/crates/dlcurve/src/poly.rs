//! Dense univariate polynomials over a prime field F_p.
//!
//! Only what field construction needs: multiplication, remainder, gcd and
//! modular exponentiation, enough to run the standard irreducibility test.
//! Coefficient vectors are little-endian (constant term first).

pub(crate) fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

pub(crate) fn deg(v: &[u64]) -> usize {
    let mut d = v.len();
    while d > 1 && v[d - 1] == 0 {
        d -= 1;
    }
    d - 1
}

pub(crate) fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|&c| c == 0)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if is_zero(a) || is_zero(b) {
        return vec![0];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            let t = (out[i + j] as u128 + ai as u128 * bj as u128) % p as u128;
            out[i + j] = t as u64;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` by monic-after-normalisation `m`.
pub(crate) fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let dm = deg(m);
    let lead_inv = inv_mod_p(m[dm], p);
    let mut r: Vec<u64> = a.to_vec();
    trim(&mut r);
    while deg(&r) >= dm && !is_zero(&r) {
        let dr = deg(&r);
        let c = (r[dr] as u128 * lead_inv as u128 % p as u128) as u64;
        let shift = dr - dm;
        for (k, &mk) in m.iter().enumerate().take(dm + 1) {
            let sub = c as u128 * mk as u128 % p as u128;
            let cur = r[shift + k] as u128;
            r[shift + k] = ((cur + p as u128 - sub % p as u128) % p as u128) as u64;
        }
        trim(&mut r);
        if deg(&r) == dr && !is_zero(&r) && r.len() > dm {
            // leading term must have cancelled
            unreachable!("polynomial remainder failed to reduce degree");
        }
    }
    r
}

pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !is_zero(&y) {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// base^e mod (m, p) by square and multiply.
pub(crate) fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod_p(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0.
    pow_mod_p(a % p, p - 2, p)
}

pub(crate) fn pow_mod_p(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Irreducibility over F_p of a monic polynomial of degree k >= 1:
/// x^(p^k) = x mod f, and gcd(x^(p^(k/r)) - x, f) = 1 for primes r | k.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = deg(f);
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    if f[0] == 0 {
        // divisible by x
        return false;
    }
    let x = vec![0u64, 1];
    // frob[m] = x^(p^m) mod f, built by repeated p-th powers
    let mut frob = x.clone();
    let mut frob_at = vec![Vec::new(); k + 1];
    for m in 1..=k {
        frob = powmod(&frob, p, f, p);
        frob_at[m] = frob.clone();
    }
    // x^(p^k) must equal x
    let mut target = frob_at[k].clone();
    trim(&mut target);
    if target != x {
        return false;
    }
    for r in prime_divisors(k as u64) {
        let m = k / r as usize;
        let mut diff = frob_at[m].clone();
        // diff - x
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        let g = gcd(f, &diff, p);
        if deg(&g) != 0 {
            return false;
        }
    }
    true
}

pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Deterministic Miller-Rabin, valid for all u64.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_p(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_and_gcd() {
        // (x^2 + 1) mod (x + 1) over F_3: x = -1 gives 1 + 1 = 2
        let r = rem(&[1, 0, 1], &[1, 1], 3);
        assert_eq!(r, vec![2]);
        // gcd(x^2 - 1, x - 1) = x - 1 over F_5 (up to scalar)
        let g = gcd(&[4, 0, 1], &[4, 1], 5);
        assert_eq!(deg(&g), 1);
    }

    #[test]
    fn irreducibility_small() {
        // x^2 + 1 irreducible over F_3, reducible over F_5
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        // x^2 + x + 1 irreducible over F_2
        assert!(is_irreducible(&[1, 1, 1], 2));
        // x^2 + 1 = (x+1)^2 over F_2
        assert!(!is_irreducible(&[1, 0, 1], 2));
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(8191));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(6));
        assert!(is_prime_u64(4294967311)); // prime just above 2^32
    }
}

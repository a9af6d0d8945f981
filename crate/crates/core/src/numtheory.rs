//! Small integer helpers shared by the constructions.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    smallest_prime_factor(n) == n
}

/// Smallest prime dividing `n`; `n` itself when prime. Returns 1 for `n <= 1`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    if n <= 1 {
        return 1;
    }
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

//! Prime tables, the prime-supply check and prime fingerprint collisions.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::TranslateError;
use crate::rational::Q;

/// Largest limit `prime_table` accepts.
pub const PRIME_TABLE_CAP: u64 = 200_000_000;

/// Primes `<= limit` in increasing order.
pub fn prime_table(limit: u64) -> Result<Vec<u64>, TranslateError> {
    if limit > PRIME_TABLE_CAP {
        return Err(TranslateError::CapExceeded { what: "prime table limit", value: limit, cap: PRIME_TABLE_CAP });
    }
    let len = limit as usize + 1;
    let mut composite = vec![0u64; len.div_ceil(64)];
    let mut out = Vec::new();
    for i in 2..len {
        if composite[i / 64] >> (i % 64) & 1 == 1 {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j < len {
            composite[j / 64] |= 1 << (j % 64);
            j += i;
        }
    }
    Ok(out)
}

/// `ceil(2 n ln n)`, the range the supply check looks at.
pub fn supply_range(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let x = n as f64;
    libm::ceil(2.0 * x * libm::log(x)) as u64
}

/// Whether there are at least `n` primes `<= 2 n ln n`.
pub fn check_prime_supply(n: u64) -> Result<bool, TranslateError> {
    let limit = supply_range(n);
    Ok(prime_table(limit)?.len() as u64 >= n)
}

/// The smallest `n0 >= 1` such that the supply check holds for every `n` in
/// `n0..=max_n`, from a single sieve.
pub fn prime_supply_threshold(max_n: u64) -> Result<u64, TranslateError> {
    let primes = prime_table(supply_range(max_n.max(2)))?;
    let mut threshold = 1;
    for n in 1..=max_n {
        let limit = supply_range(n);
        let count = primes.partition_point(|&p| p <= limit) as u64;
        if count < n {
            threshold = n + 1;
        }
    }
    Ok(threshold)
}

/// Fraction of primes in `primes` under which two distinct members of `set`
/// are congruent.
pub fn hash_collision_rate(set: &[BigUint], primes: &[u64]) -> Q {
    if primes.is_empty() {
        return Q::zero();
    }
    let mut distinct: Vec<&BigUint> = set.iter().collect();
    distinct.sort();
    distinct.dedup();
    let colliding = primes
        .iter()
        .filter(|&&p| {
            let mut residues: Vec<u64> = distinct
                .iter()
                .map(|m| {
                    let r = *m % BigUint::from(p);
                    u64::try_from(&r).expect("residue below p")
                })
                .collect();
            let len = residues.len();
            residues.sort_unstable();
            residues.dedup();
            residues.len() < len
        })
        .count();
    Q::new(BigInt::from(colliding), BigInt::from(primes.len()))
}

/// Whether `(set, bits, k, primes)` meets the hashing hypothesis: every
/// member is below `2^bits` and there are at least `k * bits * |set|^2`
/// primes.
pub fn hash_hypothesis_holds(set: &[BigUint], bits: u64, k: u64, primes: &[u64]) -> bool {
    let bound = BigUint::from(1u32) << bits;
    set.iter().all(|m| *m < bound) && primes.len() as u128 >= k as u128 * bits as u128 * (set.len() as u128).pow(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn small_tables() {
        assert_eq!(prime_table(20).unwrap(), [2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(prime_table(1).unwrap().is_empty());
        assert_eq!(prime_table(47).unwrap().len(), 15);
        assert!(prime_table(PRIME_TABLE_CAP + 1).is_err());
    }

    #[test]
    fn table_matches_primality_test() {
        let table = prime_table(10_000).unwrap();
        let direct: Vec<u64> = (0..=10_000).filter(|&n| crate::logic::builtins::is_prime_u64(n)).collect();
        assert_eq!(table, direct);
    }

    #[test]
    fn supply_examples() {
        assert_eq!(supply_range(10), 47);
        assert!(check_prime_supply(10).unwrap());
        assert_eq!(supply_range(2), 3);
        assert!(check_prime_supply(2).unwrap());
        assert!(!check_prime_supply(1).unwrap());
    }

    #[test]
    fn supply_threshold_up_to_ten_thousand() {
        let n0 = prime_supply_threshold(10_000).unwrap();
        assert_eq!(n0, 2);
        for n in [2, 3, 17, 1000, 10_000] {
            assert!(check_prime_supply(n).unwrap());
        }
    }

    #[test]
    fn collision_examples() {
        let primes = prime_table(1000).unwrap();
        assert_eq!(hash_collision_rate(&[BigUint::from(12345u32)], &primes), Q::zero());
        let set: Vec<BigUint> = [3u32, 5, 9].iter().map(|&v| BigUint::from(v)).collect();
        let first72: Vec<u64> = primes[..72].to_vec();
        assert!(hash_hypothesis_holds(&set, 4, 2, &first72));
        // 5-3 = 2, 9-3 = 6, 9-5 = 4: only p = 2 and p = 3 collide
        assert_eq!(hash_collision_rate(&set, &first72), Q::new(2.into(), 72.into()));
        let m = 10u64;
        let pair = [BigUint::zero(), (BigUint::one() << m) - 1u32];
        let bounded = prime_table(2 * m * 4 * 4).unwrap();
        assert!(hash_collision_rate(&pair, &bounded) < Q::new(1.into(), 4.into()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn collision_rate_below_one_over_k(
            values in proptest::collection::vec(any::<u64>(), 1..6),
            bits in 8u64..40,
            k in 2u64..5,
        ) {
            let set: Vec<BigUint> = values.iter().map(|&v| BigUint::from(v) % (BigUint::one() << bits)).collect();
            let need = (k * bits * (set.len() as u64).pow(2)) as usize;
            let primes: Vec<u64> = prime_table(400_000).unwrap().into_iter().take(need).collect();
            prop_assume!(primes.len() == need);
            prop_assert!(hash_hypothesis_holds(&set, bits, k, &primes));
            prop_assert!(hash_collision_rate(&set, &primes) < Q::new(1.into(), k.into()));
        }
    }
}

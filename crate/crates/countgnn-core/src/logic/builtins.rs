//! Numerical relations available to formulas as `builtin name(args)`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::nat::Nat;

pub type BuiltinFn = fn(&[Nat]) -> bool;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("builtin `{0}` is already registered")]
pub struct DuplicateBuiltin(pub String);

#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub arity: usize,
    pub func: BuiltinFn,
}

#[derive(Debug, Clone, Default)]
pub struct BuiltinRegistry {
    entries: BTreeMap<String, Builtin>,
}

impl BuiltinRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry holding the standard relations.
    pub fn standard() -> Self {
        let mut r = Self::new();
        register_standard_builtins(&mut r).expect("fresh registry");
        r
    }

    pub fn register(&mut self, name: &str, arity: usize, func: BuiltinFn) -> Result<(), DuplicateBuiltin> {
        if self.entries.contains_key(name) {
            return Err(DuplicateBuiltin(name.to_string()));
        }
        self.entries.insert(name.to_string(), Builtin { arity, func });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Builtin> {
        self.entries.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Registers `prime`, `bit`, `leq`, `add`, `sub`, `mul`, `div`, `mod` and
/// `even`. Ternary arithmetic relations read `op(a, b, c)` as `a op b = c`.
pub fn register_standard_builtins(reg: &mut BuiltinRegistry) -> Result<(), DuplicateBuiltin> {
    reg.register("prime", 1, |a| is_prime(&a[0]))?;
    reg.register("bit", 2, |a| a[1].bit(&a[0]))?;
    reg.register("leq", 2, |a| a[0] <= a[1])?;
    reg.register("add", 3, |a| a[0].add(&a[1]) == a[2])?;
    reg.register("sub", 3, |a| a[0].checked_sub(&a[1]).as_ref() == Some(&a[2]))?;
    reg.register("mul", 3, |a| a[0].mul(&a[1]) == a[2])?;
    reg.register("div", 3, |a| !a[1].is_zero() && Nat::from_big(a[0].to_big() / a[1].to_big()) == a[2])?;
    reg.register("mod", 3, |a| !a[1].is_zero() && Nat::from_big(a[0].to_big() % a[1].to_big()) == a[2])?;
    reg.register("even", 1, |a| a[0].rem_u64(2) == 0)?;
    Ok(())
}

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller–Rabin with the first twelve prime bases: deterministic below
/// 3.3 * 10^24, which covers every value a formula can reach at desk scale.
pub fn is_prime(n: &Nat) -> bool {
    match n {
        Nat::Small(v) => is_prime_u64(*v),
        Nat::Big(b) => is_prime_big(b),
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_big(n: &BigUint) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    for &p in &WITNESSES {
        if (n % p).is_zero() {
            return *n == BigUint::from(p);
        }
    }
    let n1 = n - &one;
    let mut d = n1.clone();
    let mut s = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

use std::cmp::Ordering;
use std::fmt;

/// The jet variable `u^alpha_k`, the formal k-th x-derivative of `u^alpha`.
///
/// `alpha` is 1-based; `order == 0` denotes `u^alpha` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetCoordinate {
    pub alpha: u16,
    pub order: u16,
}

/// The odd generator `theta_{alpha,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OddCoordinate {
    pub alpha: u16,
    pub order: u16,
}

impl JetCoordinate {
    pub const fn new(alpha: u16, order: u16) -> Self {
        Self { alpha, order }
    }

    /// `u_k` for a single dependent variable.
    pub const fn u(order: u16) -> Self {
        Self { alpha: 1, order }
    }

    pub fn next(self) -> Self {
        Self::new(self.alpha, self.order + 1)
    }

    pub fn prev(self) -> Option<Self> {
        self.order.checked_sub(1).map(|k| Self::new(self.alpha, k))
    }
}

impl OddCoordinate {
    pub const fn new(alpha: u16, order: u16) -> Self {
        Self { alpha, order }
    }

    /// `theta_k` for a single dependent variable.
    pub const fn theta(order: u16) -> Self {
        Self { alpha: 1, order }
    }

    pub fn next(self) -> Self {
        Self::new(self.alpha, self.order + 1)
    }

    pub fn prev(self) -> Option<Self> {
        self.order.checked_sub(1).map(|k| Self::new(self.alpha, k))
    }
}

/// Either kind of coordinate, used where an operation accepts both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coordinate {
    Even(JetCoordinate),
    Odd(OddCoordinate),
}

impl From<JetCoordinate> for Coordinate {
    fn from(v: JetCoordinate) -> Self {
        Coordinate::Even(v)
    }
}

impl From<OddCoordinate> for Coordinate {
    fn from(v: OddCoordinate) -> Self {
        Coordinate::Odd(v)
    }
}

/// A monomial in the jet variables and odd generators.
///
/// Even exponents are stored sorted by coordinate with no zero entries. Odd
/// generators are stored strictly increasing, so `theta^2 = 0` holds
/// structurally and any reordering sign lives in the owning coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    even: Vec<(JetCoordinate, i32)>,
    odd: Vec<OddCoordinate>,
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    // Graded by theta-degree first so that printed forms group naturally.
    fn cmp(&self, other: &Self) -> Ordering {
        self.odd
            .len()
            .cmp(&other.odd.len())
            .then_with(|| self.odd.cmp(&other.odd))
            .then_with(|| self.even.cmp(&other.even))
    }
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn jet(v: JetCoordinate, exponent: i32) -> Self {
        let even = if exponent == 0 { Vec::new() } else { vec![(v, exponent)] };
        Self { even, odd: Vec::new() }
    }

    pub fn odd(t: OddCoordinate) -> Self {
        Self { even: Vec::new(), odd: vec![t] }
    }

    /// Build from raw parts. Returns the sign produced by sorting the odd
    /// generators, or `None` when an odd generator repeats.
    pub fn from_parts(
        even: impl IntoIterator<Item = (JetCoordinate, i32)>,
        odd: impl IntoIterator<Item = OddCoordinate>,
    ) -> Option<(Self, i8)> {
        let mut m = Self::one();
        for (v, e) in even {
            m.add_exponent(v, e);
        }
        let mut odd: Vec<OddCoordinate> = odd.into_iter().collect();
        let sign = sort_with_sign(&mut odd)?;
        m.odd = odd;
        Some((m, sign))
    }

    pub fn even(&self) -> &[(JetCoordinate, i32)] {
        &self.even
    }

    pub fn odd_part(&self) -> &[OddCoordinate] {
        &self.odd
    }

    pub fn even_part(&self) -> Monomial {
        Monomial { even: self.even.clone(), odd: Vec::new() }
    }

    pub fn exponent(&self, v: JetCoordinate) -> i32 {
        match self.even.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => self.even[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains_odd(&self, t: OddCoordinate) -> bool {
        self.odd.binary_search(&t).is_ok()
    }

    pub fn theta_degree(&self) -> usize {
        self.odd.len()
    }

    /// Homogeneity degree: `deg u_k = deg theta_k = k`, so `u_1^-1` has degree -1.
    pub fn degree(&self) -> i64 {
        let e: i64 = self.even.iter().map(|(v, e)| v.order as i64 * *e as i64).sum();
        let o: i64 = self.odd.iter().map(|t| t.order as i64).sum();
        e + o
    }

    /// Highest jet index present among even and odd coordinates.
    pub fn order(&self) -> Option<u16> {
        let e = self.even.iter().map(|(v, _)| v.order).max();
        let o = self.odd.iter().map(|t| t.order).max();
        e.max(o)
    }

    /// Total polynomial degree in the order-zero variables `u^alpha`.
    pub fn udeg(&self) -> i32 {
        self.even.iter().filter(|(v, _)| v.order == 0).map(|(_, e)| *e).sum()
    }

    pub fn max_alpha(&self) -> u16 {
        let e = self.even.iter().map(|(v, _)| v.alpha).max().unwrap_or(0);
        let o = self.odd.iter().map(|t| t.alpha).max().unwrap_or(0);
        e.max(o)
    }

    pub fn has_negative_exponent_outside(&self, allowed: Option<JetCoordinate>) -> Option<JetCoordinate> {
        self.even
            .iter()
            .find(|(v, e)| *e < 0 && Some(*v) != allowed)
            .map(|(v, _)| *v)
    }

    pub(crate) fn add_exponent(&mut self, v: JetCoordinate, e: i32) {
        if e == 0 {
            return;
        }
        match self.even.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => {
                self.even[i].1 += e;
                if self.even[i].1 == 0 {
                    self.even.remove(i);
                }
            }
            Err(i) => self.even.insert(i, (v, e)),
        }
    }

    /// Same monomial with the exponent of `v` shifted by `delta`.
    pub fn with_exponent_shift(&self, v: JetCoordinate, delta: i32) -> Monomial {
        let mut m = self.clone();
        m.add_exponent(v, delta);
        m
    }

    /// Remove the odd generator at position `idx`, returning `(-1)^idx`.
    pub(crate) fn remove_odd_at(&self, idx: usize) -> (Monomial, i8) {
        let mut m = self.clone();
        m.odd.remove(idx);
        (m, if idx % 2 == 0 { 1 } else { -1 })
    }

    pub(crate) fn odd_position(&self, t: OddCoordinate) -> Option<usize> {
        self.odd.binary_search(&t).ok()
    }

    /// Replace the odd generator at `idx` by its successor `theta_{alpha,k+1}`.
    /// No reordering is needed because nothing sorts strictly between the two.
    pub(crate) fn raise_odd_at(&self, idx: usize) -> Option<Monomial> {
        let next = self.odd[idx].next();
        if self.odd.binary_search(&next).is_ok() {
            return None;
        }
        let mut m = self.clone();
        m.odd[idx] = next;
        Some(m)
    }

    /// Graded product; `None` if an odd generator repeats, otherwise the
    /// product monomial together with its Koszul sign.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, i8)> {
        let mut even = Vec::with_capacity(self.even.len() + other.even.len());
        let (mut i, mut j) = (0, 0);
        while i < self.even.len() && j < other.even.len() {
            let (a, ea) = self.even[i];
            let (b, eb) = other.even[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    even.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    even.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    if ea + eb != 0 {
                        even.push((a, ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        even.extend_from_slice(&self.even[i..]);
        even.extend_from_slice(&other.even[j..]);

        // merge odd parts counting inversions
        let mut odd = Vec::with_capacity(self.odd.len() + other.odd.len());
        let mut inversions = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < self.odd.len() && j < other.odd.len() {
            match self.odd[i].cmp(&other.odd[j]) {
                Ordering::Less => {
                    odd.push(self.odd[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    odd.push(other.odd[j]);
                    inversions += self.odd.len() - i;
                    j += 1;
                }
                Ordering::Equal => return None,
            }
        }
        odd.extend_from_slice(&self.odd[i..]);
        odd.extend_from_slice(&other.odd[j..]);
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((Monomial { even, odd }, sign))
    }
}

fn sort_with_sign(v: &mut [OddCoordinate]) -> Option<i8> {
    let mut sign = 1i8;
    // insertion sort; odd parts are short
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl fmt::Display for JetCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.alpha == 1 { "u".to_string() } else { format!("u{}", self.alpha) };
        if self.order == 0 {
            write!(f, "{base}")
        } else {
            write!(f, "{base}_{}", self.order)
        }
    }
}

impl fmt::Display for OddCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.alpha == 1 { "theta".to_string() } else { format!("theta{}", self.alpha) };
        if self.order == 0 {
            write!(f, "{base}")
        } else {
            write!(f, "{base}_{}", self.order)
        }
    }
}

impl fmt::Display for Monomial {
    /// Factors joined by `*`; even factors first. The empty monomial prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.even {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        for t in &self.odd {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

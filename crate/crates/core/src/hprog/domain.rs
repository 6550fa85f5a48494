use std::fmt;

use num_traits::{Signed, ToPrimitive};

use super::HprogError;
use crate::symexpr::{format_rational, time_named, Expr, Pred};
use crate::Rational;

/// Shape of a time set containing 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TimeKind {
    AllReals,
    NonNegative,
    /// `[lo, hi]` with `lo <= 0 <= hi`.
    ClosedInterval(Rational, Rational),
}

impl TimeKind {
    pub fn interval(lo: Rational, hi: Rational) -> Result<Self, HprogError> {
        if lo.is_positive() || hi.is_negative() {
            return Err(HprogError::BadDomain(format!(
                "[{}, {}] does not contain 0",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(TimeKind::ClosedInterval(lo, hi))
    }

    pub fn lower(&self) -> Option<f64> {
        match self {
            TimeKind::AllReals => None,
            TimeKind::NonNegative => Some(0.0),
            TimeKind::ClosedInterval(lo, _) => lo.to_f64(),
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match self {
            TimeKind::ClosedInterval(_, hi) => hi.to_f64(),
            _ => None,
        }
    }

    pub fn has_negative_times(&self) -> bool {
        match self {
            TimeKind::AllReals => true,
            TimeKind::NonNegative => false,
            TimeKind::ClosedInterval(lo, _) => lo.is_negative(),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lower().map_or(true, |lo| lo <= t) && self.upper().map_or(true, |hi| t <= hi)
    }

    pub fn subset_of(&self, other: &TimeKind) -> bool {
        use TimeKind::*;
        match (self, other) {
            (_, AllReals) => true,
            (AllReals, _) => false,
            (NonNegative, NonNegative) => true,
            (NonNegative, ClosedInterval(..)) => false,
            (ClosedInterval(lo, _), NonNegative) => !lo.is_negative(),
            (ClosedInterval(a, b), ClosedInterval(c, d)) => c <= a && b <= d,
        }
    }

    /// Membership of the time name `var` as a predicate.
    pub fn membership(&self, var: &str) -> Pred {
        let t = time_named(var);
        match self {
            TimeKind::AllReals => Pred::True,
            TimeKind::NonNegative => Pred::le(Expr::zero(), t),
            TimeKind::ClosedInterval(lo, hi) => Pred::and(
                Pred::le(Expr::Const(lo.clone()), t.clone()),
                Pred::le(t, Expr::Const(hi.clone())),
            ),
        }
    }
}

impl fmt::Display for TimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeKind::AllReals => f.write_str("R"),
            TimeKind::NonNegative => f.write_str("[0,inf)"),
            TimeKind::ClosedInterval(lo, hi) => {
                write!(f, "[{},{}]", format_rational(lo), format_rational(hi))
            }
        }
    }
}

/// A time domain with an optional query sub-domain `U` used by wlp.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeDomain {
    pub kind: TimeKind,
    pub query: Option<TimeKind>,
}

impl TimeDomain {
    pub fn new(kind: TimeKind) -> Self {
        Self { kind, query: None }
    }

    pub fn all_reals() -> Self {
        Self::new(TimeKind::AllReals)
    }

    pub fn non_negative() -> Self {
        Self::new(TimeKind::NonNegative)
    }

    pub fn with_query(mut self, query: TimeKind) -> Result<Self, HprogError> {
        if !query.subset_of(&self.kind) {
            return Err(HprogError::BadDomain(format!(
                "query domain {query} is not contained in {}",
                self.kind
            )));
        }
        self.query = Some(query);
        Ok(self)
    }

    /// The set wlp quantifies over: the query domain when present.
    pub fn effective(&self) -> &TimeKind {
        self.query.as_ref().unwrap_or(&self.kind)
    }
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.effective().fmt(f)
    }
}

impl Default for TimeDomain {
    fn default() -> Self {
        Self::all_reals()
    }
}


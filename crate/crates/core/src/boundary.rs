//! Moving boundaries as sums of analytic terms.
//!
//! A boundary is parsed from a small expression grammar:
//!
//! ```text
//! expr   := ["-"] term (("+" | "-") term)*
//! term   := number | number "*" factor | factor
//! factor := "(1+t)^" number | "ln(1+t)" | "exp(" "-" number "*t" ")"
//! ```
//!
//! Numbers are decimal literals (optional fraction and exponent). Power and
//! log terms use the shifted base `1+t` so values and derivatives stay finite
//! at `t = 0` for any real exponent. Every term carries exact first and
//! second derivatives, which downstream code relies on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// Kind of a single boundary term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TermKind {
    /// `c`
    Constant,
    /// `c * (1+t)^gamma`
    Power,
    /// `c * ln(1+t)`
    Log,
    /// `c * exp(-lambda * t)`, `lambda > 0`
    Exp,
}

/// One additive term of a boundary function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTerm {
    pub kind: TermKind,
    pub coefficient: f64,
    /// Power exponent gamma for `Power`, decay rate lambda for `Exp`;
    /// zero (unused) otherwise.
    pub exponent_or_rate: f64,
}

impl BoundaryTerm {
    fn eval(&self, t: f64, order: u8) -> f64 {
        let c = self.coefficient;
        match self.kind {
            TermKind::Constant => {
                if order == 0 {
                    c
                } else {
                    0.0
                }
            }
            TermKind::Power => {
                let g = self.exponent_or_rate;
                match order {
                    0 => c * (1.0 + t).powf(g),
                    1 => c * g * (1.0 + t).powf(g - 1.0),
                    _ => c * g * (g - 1.0) * (1.0 + t).powf(g - 2.0),
                }
            }
            TermKind::Log => match order {
                0 => c * (1.0 + t).ln(),
                1 => c / (1.0 + t),
                _ => -c / ((1.0 + t) * (1.0 + t)),
            },
            TermKind::Exp => {
                let l = self.exponent_or_rate;
                let e = (-l * t).exp();
                match order {
                    0 => c * e,
                    1 => -c * l * e,
                    _ => c * l * l * e,
                }
            }
        }
    }

    fn render(&self) -> String {
        match self.kind {
            TermKind::Constant => format!("{}", self.coefficient),
            TermKind::Power => format!("{}*(1+t)^{}", self.coefficient, self.exponent_or_rate),
            TermKind::Log => format!("{}*ln(1+t)", self.coefficient),
            TermKind::Exp => format!("{}*exp(-{}*t)", self.coefficient, self.exponent_or_rate),
        }
    }
}

/// A moving boundary `f` with exact `f'` and `f''`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFunction {
    pub terms: Vec<BoundaryTerm>,
    pub source_text: String,
}

impl BoundaryFunction {
    /// Build from terms, enforcing `f(0) > 0` and positive exponential rates.
    pub fn from_terms(terms: Vec<BoundaryTerm>, source_text: String) -> Result<Self> {
        for term in &terms {
            if term.kind == TermKind::Exp && term.exponent_or_rate <= 0.0 {
                return Err(Error::Rate(format!(
                    "exponential term requires a positive decay rate, got {}",
                    term.exponent_or_rate
                )));
            }
            if !term.coefficient.is_finite() || !term.exponent_or_rate.is_finite() {
                return Err(Error::Domain("term parameter is not finite".into()));
            }
        }
        let b = BoundaryFunction { terms, source_text };
        let f0 = b.value(0.0);
        if !(f0 > 0.0) {
            return Err(Error::Domain(format!("f(0) = {} violates f(0) > 0", f0)));
        }
        Ok(b)
    }

    /// Evaluate `f`, `f'`, or `f''` at `t >= 0`.
    pub fn eval(&self, t: f64, order: u8) -> f64 {
        assert!(t >= 0.0, "boundary evaluated at negative time {}", t);
        assert!(order <= 2, "derivative order must be 0, 1, or 2");
        self.terms.iter().map(|term| term.eval(t, order)).sum()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    pub fn deriv1(&self, t: f64) -> f64 {
        self.eval(t, 1)
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.eval(t, 2)
    }

    /// Canonical text form; parsing it back yields an identical term list.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, term) in self.terms.iter().enumerate() {
            if i == 0 {
                out.push_str(&term.render());
            } else if term.coefficient < 0.0 {
                let mut flipped = *term;
                flipped.coefficient = -term.coefficient;
                out.push_str(" - ");
                out.push_str(&flipped.render());
            } else {
                out.push_str(" + ");
                out.push_str(&term.render());
            }
        }
        out
    }
}

/// Parse a boundary expression. Rejects boundaries with `f(0) <= 0` and
/// exponential terms with nonpositive rate.
pub fn parse_boundary(expr: &str) -> Result<BoundaryFunction> {
    let mut parser = Parser { input: expr.as_bytes(), pos: 0 };
    let terms = parser.expr()?;
    BoundaryFunction::from_terms(terms, expr.to_string())
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax { position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.input[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", lit)))
        }
    }

    fn try_lit(&mut self, lit: &str) -> bool {
        if self.input[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Vec<BoundaryTerm>> {
        let mut terms = Vec::new();
        self.skip_ws();
        let mut sign = if self.try_lit("-") { -1.0 } else { 1.0 };
        loop {
            self.skip_ws();
            let mut term = self.term()?;
            term.coefficient *= sign;
            terms.push(term);
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    sign = 1.0;
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -1.0;
                    self.pos += 1;
                }
                None => break,
                Some(c) => {
                    return Err(self.error(format!(
                        "expected `+`, `-`, or end of expression, found `{}`",
                        c as char
                    )))
                }
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<BoundaryTerm> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let coefficient = self.number(false)?;
                self.skip_ws();
                if self.try_lit("*") {
                    self.skip_ws();
                    let mut term = self.factor()?;
                    term.coefficient = coefficient;
                    Ok(term)
                } else {
                    Ok(BoundaryTerm {
                        kind: TermKind::Constant,
                        coefficient,
                        exponent_or_rate: 0.0,
                    })
                }
            }
            Some(_) => {
                // bare factor, implicit coefficient 1
                let mut term = self.factor()?;
                term.coefficient = 1.0;
                Ok(term)
            }
            None => Err(self.error("expected a term")),
        }
    }

    fn factor(&mut self) -> Result<BoundaryTerm> {
        if self.try_lit("(1+t)^") {
            self.skip_ws();
            let exponent = self.number(true)?;
            return Ok(BoundaryTerm {
                kind: TermKind::Power,
                coefficient: 1.0,
                exponent_or_rate: exponent,
            });
        }
        if self.try_lit("ln(1+t)") {
            return Ok(BoundaryTerm { kind: TermKind::Log, coefficient: 1.0, exponent_or_rate: 0.0 });
        }
        if self.try_lit("exp(") {
            self.skip_ws();
            self.expect("-")?;
            self.skip_ws();
            let rate = self.number(false)?;
            self.skip_ws();
            self.expect("*t")?;
            self.skip_ws();
            self.expect(")")?;
            return Ok(BoundaryTerm { kind: TermKind::Exp, coefficient: 1.0, exponent_or_rate: rate });
        }
        Err(self.error("expected `(1+t)^`, `ln(1+t)`, or `exp(-<rate>*t)`"))
    }

    /// Lex a decimal literal. A sign is accepted only where the grammar has
    /// no separator ambiguity (power exponents).
    fn number(&mut self, allow_sign: bool) -> Result<f64> {
        let start = self.pos;
        if allow_sign && (self.peek() == Some(b'-') || self.peek() == Some(b'+')) {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        // exponent part only when followed by digits (so `1e2` lexes but the
        // `e` of a malformed tail does not get swallowed)
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mut probe = self.pos + 1;
            if matches!(self.input.get(probe), Some(b'+') | Some(b'-')) {
                probe += 1;
            }
            if matches!(self.input.get(probe), Some(c) if c.is_ascii_digit()) {
                self.pos = probe;
                while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(format!("invalid number `{}`", text)))?;
        if !value.is_finite() {
            return Err(self.error(format!("number `{}` out of range", text)));
        }
        Ok(value)
    }
}

/// Verdict of the improper integral test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Outcome of evaluating `int_1^inf |f(t)| t^{-3/2} dt` by doubling the
/// upper limit.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralReport {
    pub verdict: Verdict,
    /// Tail-extrapolated value; meaningful only when convergent.
    pub value: f64,
    /// Raw partial integrals `(U, int_1^U)`, upper limits doubling.
    pub partial_values: Vec<(f64, f64)>,
    pub tolerance_used: f64,
    /// Geometric estimate of the remaining tail at the final upper limit.
    pub tail_estimate: f64,
    /// Estimated numerical error of `value` (extrapolation stability plus
    /// accumulated panel errors).
    pub value_error_estimate: f64,
}

/// Partial integrals blow past this cap => divergent.
const DIVERGENCE_CAP: f64 = 1e6;
/// Upper limits double from 2 up to 2^MAX_DOUBLINGS.
const MAX_DOUBLINGS: u32 = 40;
/// Increment ratios at or below this certify geometric tail decay.
const GEOMETRIC_RATIO: f64 = 0.95;
/// Increment ratios at or above this, across the final doublings, certify
/// failure to decay.
const STALL_RATIO: f64 = 0.99;
/// Number of trailing doublings inspected by the end-of-budget rules.
const TAIL_WINDOW: usize = 10;

/// Integral test for a parsed boundary (Eq.-style test integrand
/// `|f(t)| t^{-3/2}` from 1 to infinity).
pub fn integral_test(b: &BoundaryFunction, tolerance: f64) -> IntegralReport {
    integral_test_fn(|t| b.value(t), tolerance)
}

/// Integral-test engine over an arbitrary integrand numerator `g`:
/// evaluates `int_1^inf |g(t)| t^{-3/2} dt` with doubling upper limits.
///
/// Convergence is declared when panel increments decay geometrically and the
/// tail-extrapolated value stabilizes within `tolerance`, or when geometric
/// decay persists through the final doublings of the budget. Divergence is
/// declared when partial integrals exceed 1e6 or the increments stall
/// (ratio >= 0.99) through the final doublings. Anything else is
/// inconclusive.
#[allow(clippy::needless_borrows_for_generic_args)]
pub fn integral_test_fn<G: Fn(f64) -> f64>(g: G, tolerance: f64) -> IntegralReport {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let integrand = |t: f64| g(t).abs() * t.powf(-1.5);
    let panel_tol = (tolerance * 1e-3).min(1e-9);

    let mut partials: Vec<(f64, f64)> = Vec::new();
    let mut increments: Vec<f64> = Vec::new();
    let mut partial = 0.0f64;
    let mut quad_err = 0.0f64;
    let mut lower = 1.0f64;
    let mut prev_extrapolated: Option<f64> = None;
    let mut tail = 0.0f64;
    let mut value = 0.0f64;
    let mut stability = f64::INFINITY;
    let mut remainder_factor = 1.0f64;

    for k in 1..=MAX_DOUBLINGS {
        let upper = 2f64.powi(k as i32);
        let r = quad::integrate(&integrand, lower, upper, panel_tol, 1e-12, 4000);
        partial += r.value;
        quad_err += r.abs_error;
        increments.push(r.value);
        partials.push((upper, partial));
        lower = upper;

        if partial > DIVERGENCE_CAP {
            return IntegralReport {
                verdict: Verdict::Divergent,
                value: partial,
                partial_values: partials,
                tolerance_used: tolerance,
                tail_estimate: f64::INFINITY,
                value_error_estimate: f64::INFINITY,
            };
        }

        if increments.len() >= 2 {
            let inc = increments[increments.len() - 1];
            let prev = increments[increments.len() - 2];
            let ratio = if prev > 0.0 { inc / prev } else { 0.0 };
            let decaying = ratio <= GEOMETRIC_RATIO || inc <= quad_err.max(f64::MIN_POSITIVE);
            tail = if decaying && ratio > 0.0 && ratio < 1.0 {
                inc * ratio / (1.0 - ratio)
            } else {
                0.0
            };
            // remaining extrapolation error contracts like the increments,
            // so the stabilization diff scales by the geometric remainder
            remainder_factor = if ratio > 0.0 && ratio < 1.0 { ratio / (1.0 - ratio) } else { 1.0 };
            value = partial + tail;
            if let Some(prev_v) = prev_extrapolated {
                stability = (value - prev_v).abs();
                if decaying && stability < tolerance && increments.len() >= 3 {
                    return IntegralReport {
                        verdict: Verdict::Convergent,
                        value,
                        partial_values: partials,
                        tolerance_used: tolerance,
                        tail_estimate: tail,
                        value_error_estimate: stability * remainder_factor.max(1.0) + quad_err,
                    };
                }
            }
            prev_extrapolated = Some(value);
        }
    }

    // Budget exhausted: classify from the trailing increment ratios.
    let n = increments.len();
    let ratios: Vec<f64> = (n - TAIL_WINDOW..n)
        .map(|i| {
            if increments[i - 1] > 0.0 {
                increments[i] / increments[i - 1]
            } else {
                0.0
            }
        })
        .collect();
    let verdict = if ratios.iter().all(|&r| r >= STALL_RATIO) {
        Verdict::Divergent
    } else if ratios.iter().all(|&r| r <= GEOMETRIC_RATIO) {
        Verdict::Convergent
    } else {
        Verdict::Inconclusive
    };
    IntegralReport {
        verdict,
        value,
        partial_values: partials,
        tolerance_used: tolerance,
        tail_estimate: tail,
        value_error_estimate: stability * remainder_factor.max(1.0) + quad_err,
    }
}

/// The three deterministic integrals appearing in the survival lower bound:
/// `(int_0^T f'(s)^2 ds, int_0^T |f''(s)| sqrt(s) ds, sqrt(T) |f'(T)|)`,
/// each to relative tolerance 1e-10.
pub fn exponent_integrals(b: &BoundaryFunction, t_horizon: f64) -> (f64, f64, f64) {
    assert!(t_horizon > 0.0, "horizon must be positive");
    let fp_sq = quad::integrate(
        |s| {
            let d = b.deriv1(s);
            d * d
        },
        0.0,
        t_horizon,
        1e-14,
        1e-10,
        4000,
    )
    .value;
    let fpp_sqrt = quad::integrate(
        |s| b.deriv2(s).abs() * s.sqrt(),
        0.0,
        t_horizon,
        1e-14,
        1e-10,
        4000,
    )
    .value;
    let terminal = t_horizon.sqrt() * b.deriv1(t_horizon).abs();
    (fp_sq, fpp_sqrt, terminal)
}

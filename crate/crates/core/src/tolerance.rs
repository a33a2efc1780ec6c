//! Central table of default tolerances. Every report echoes the table it
//! was produced with, and the CLI can override single entries by name.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

macro_rules! tolerance_table {
    ($( $(#[$doc:meta])* $name:ident = $value:expr ),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
        pub struct Tolerances {
            $( $(#[$doc])* pub $name: f64, )*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Self { $( $name: $value, )* }
            }
        }

        impl Tolerances {
            pub const NAMES: &'static [&'static str] = &[$( stringify!($name) ),*];

            /// Overrides one entry by name.
            pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
                match name {
                    $( stringify!($name) => { self.$name = value; Ok(()) } )*
                    other => Err(Error::Domain(alloc::format!("unknown tolerance '{other}'"))),
                }
            }

            pub fn entries(&self) -> Vec<(String, f64)> {
                alloc::vec![$( (String::from(stringify!($name)), self.$name) ),*]
            }
        }
    };
}

tolerance_table! {
    /// Cut-locus margin: pairs closer than this to the antipode are rejected.
    cut_margin = 1e-9,
    /// Residual on `f'(d) − |p|` for the c-exponential solve.
    c_exp_newton = 1e-12,
    /// Equality tolerance for active supports of a finite-max potential.
    active_support = 1e-10,
    /// Rounding slack added to grid-minimum comparisons.
    grid_min = 1e-6,
    /// Feasibility slack of exact transport duals.
    dual_feasibility = 1e-8,
    /// Complementary slackness on the support of an exact plan.
    complementary_slackness = 1e-7,
    /// Marginal residual of transport plans.
    marginal = 1e-9,
    /// Smallest admissible 2-monotonicity margin.
    monotone_margin = 1e-9,
    /// Row concentration needed to read a plan row as a single target.
    split_row = 1e-6,
    /// Positive mass threshold of a plan entry.
    plan_support = 1e-12,
    /// Convergence tolerance of the entropic scaling iteration (marginal L1).
    sinkhorn = 1e-9,
    /// Slack of the Delanoë–Loeper inequality on discrete maps.
    del_loep_slack = 1e-6,
}

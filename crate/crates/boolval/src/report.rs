//! The machine-readable report schema shared by the CLI and the sweep
//! harnesses: `{"cmd":..., "seed":..., "checks":[...]}` with one entry per
//! named check. Reports serialize deterministically, so identical inputs and
//! seeds produce byte-identical JSON.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Details for failures (and occasionally for passes), as free-form JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Pass,
            witness: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: serde_json::Value) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Fail,
            witness: Some(witness),
        }
    }

    pub fn of(name: impl Into<String>, ok: bool, witness: serde_json::Value) -> Check {
        if ok {
            Check::pass(name)
        } else {
            Check::fail(name, witness)
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub cmd: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn new(cmd: impl Into<String>, seed: Option<u64>) -> CheckReport {
        CheckReport {
            cmd: cmd.into(),
            seed,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// Plain-text rendering: one line per check.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let status = if check.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{status}] {}\n", check.name));
            if let Some(witness) = &check.witness {
                out.push_str(&format!("       {witness}\n"));
            }
        }
        out
    }
}

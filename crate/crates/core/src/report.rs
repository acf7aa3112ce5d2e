//! Structured validation reports.
//!
//! Every validator in this crate evaluates all of its laws and records, per
//! law, either a pass or the first witness it found. Reports render as stable
//! line-oriented text: `<LAW>: pass` or `<LAW>: fail <witness>`.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawOutcome {
    pub law: String,
    /// `None` when the law holds.
    pub witness: Option<String>,
}

impl LawOutcome {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    outcomes: Vec<LawOutcome>,
    notes: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a law that held.
    pub fn pass(&mut self, law: impl Into<String>) {
        self.record(law, None);
    }

    /// Records a law with its first witness.
    pub fn fail(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.record(law, Some(witness.into()));
    }

    pub fn record(&mut self, law: impl Into<String>, witness: Option<String>) {
        self.outcomes.push(LawOutcome {
            law: law.into(),
            witness,
        });
    }

    /// Free-form diagnostic line; never affects validity.
    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.outcomes.extend(other.outcomes);
        self.notes.extend(other.notes);
    }

    pub fn is_valid(&self) -> bool {
        self.outcomes.iter().all(LawOutcome::holds)
    }

    pub fn outcomes(&self) -> &[LawOutcome] {
        &self.outcomes
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Witness for `law`, if it was checked and failed.
    pub fn violation(&self, law: &str) -> Option<&str> {
        self.outcomes
            .iter()
            .find(|o| o.law == law)
            .and_then(|o| o.witness.as_deref())
    }

    pub fn violated_laws(&self) -> Vec<&str> {
        self.outcomes
            .iter()
            .filter(|o| !o.holds())
            .map(|o| o.law.as_str())
            .collect()
    }

    pub fn checked(&self, law: &str) -> bool {
        self.outcomes.iter().any(|o| o.law == law)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            match &o.witness {
                None => writeln!(f, "{}: pass", o.law)?,
                Some(w) => writeln!(f, "{}: fail {}", o.law, w)?,
            }
        }
        for n in &self.notes {
            writeln!(f, "# {n}")?;
        }
        Ok(())
    }
}

/// Records the first witness produced by `search` under `law`.
pub(crate) fn check(report: &mut ValidationReport, law: &str, search: impl FnOnce() -> Option<String>) {
    report.record(law, search());
}

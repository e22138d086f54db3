//! Run-report rendering. Timings live in the console report only; output
//! files stay byte-deterministic for identical commands, inputs and seeds.

use std::fmt;
use std::path::Path;

pub struct Phase {
    pub name: &'static str,
    pub seconds: f64,
}

impl Phase {
    pub fn new(name: &'static str, seconds: f64) -> Self {
        Self { name, seconds }
    }
}

pub struct RunReport {
    command: &'static str,
    model_digest: String,
    phases: Vec<Phase>,
    outputs: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str, model_digest: &str) -> Self {
        Self {
            command,
            model_digest: model_digest.to_string(),
            phases: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn phase(mut self, phase: Phase) -> Self {
        self.phases.push(phase);
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command  {}", self.command)?;
        let short = &self.model_digest[..self.model_digest.len().min(16)];
        writeln!(f, "model    sha256:{short}")?;
        for phase in &self.phases {
            writeln!(f, "{:<8} {:.3}s", phase.name, phase.seconds)?;
        }
        for output in &self.outputs {
            writeln!(f, "wrote    {output}")?;
        }
        Ok(())
    }
}

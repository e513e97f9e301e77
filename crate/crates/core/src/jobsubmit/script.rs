use std::fmt;

use super::JobOptions;

pub const DIRECTIVE_PREFIX: &str = "#SBATCH ";
const SHEBANG: &str = "#!/bin/bash";

/// A generated SLURM batch script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmitScript {
    /// Complete `#SBATCH ...` lines.
    pub directives: Vec<String>,
    pub payload: String,
}

impl SubmitScript {
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SubmitScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{SHEBANG}")?;
        for directive in &self.directives {
            writeln!(f, "{directive}")?;
        }
        writeln!(f)?;
        writeln!(f, "{}", self.payload)
    }
}

fn directive(option: impl fmt::Display) -> String {
    format!("{DIRECTIVE_PREFIX}{option}")
}

/// Builds the batch script: job name, task count and output files first, then
/// one directive per node property in application order.
pub fn generate_submit_script(opts: &JobOptions) -> SubmitScript {
    let job = &opts.base;
    let mut directives = Vec::with_capacity(4 + opts.node_properties.len());
    if let Some(name) = &job.job_name {
        directives.push(directive(format_args!("--job-name={}", shell_words::quote(name))));
    }
    directives.push(directive(format_args!("--ntasks={}", job.count)));
    if let Some(out) = &job.stdout_name {
        directives.push(directive(format_args!("--output={}", shell_words::quote(out))));
    }
    if let Some(err) = &job.stderr_name {
        directives.push(directive(format_args!("--error={}", shell_words::quote(err))));
    }
    directives.extend(opts.node_properties.iter().map(directive));

    let payload = shell_words::join(std::iter::once(&job.executable).chain(&job.arguments));
    SubmitScript { directives, payload }
}

use std::fmt::Write as _;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Provenance written as `# ` comment lines at the top of every CSV.
pub struct RunManifest {
    pub command: &'static str,
    /// Canonical argument list; rerunning it regenerates the body.
    pub invocation: Vec<String>,
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub params: Vec<(&'static str, String)>,
    started: SystemTime,
    clock: Instant,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            invocation: vec![command.to_string()],
            config: None,
            seed: None,
            output: None,
            params: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn arg(&mut self, flag: &str, value: impl ToString) {
        self.invocation.push(flag.to_string());
        self.invocation.push(value.to_string());
    }

    pub fn flag(&mut self, flag: &str) {
        self.invocation.push(flag.to_string());
    }

    pub fn param(&mut self, key: &'static str, value: impl ToString) {
        self.params.push((key, value.to_string()));
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let started = self
            .started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(s, "# tool: topo-bc {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# invocation: topo-bc {}", self.invocation.join(" "));
        let _ = writeln!(s, "# config: {}", self.config.as_deref().unwrap_or("-"));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        let _ = writeln!(
            s,
            "# output: {}",
            self.output.as_deref().unwrap_or("stdout")
        );
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "# started_unix: {started}");
        let _ = writeln!(
            s,
            "# wall_clock_s: {:.3}",
            self.clock.elapsed().as_secs_f64()
        );
        s
    }
}

/// Lines of a CSV that are not manifest comments.
#[cfg(test)]
pub fn body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines_are_comments() {
        let mut m = RunManifest::new("simulate");
        m.arg("--seed", 3);
        m.seed = Some(3);
        let h = m.header();
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# invocation: topo-bc simulate --seed 3"));
        assert_eq!(body(&format!("{h}a,b\n1,2\n")), "a,b\n1,2\n");
    }
}

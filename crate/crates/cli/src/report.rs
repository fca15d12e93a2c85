use std::fmt::{self, Display, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A command that produces artifacts rather than a verdict.
    Done,
}

/// A `key=value` report: config echo, body, verdict, then a summary block.
#[derive(Debug, Clone)]
pub struct Report {
    command: &'static str,
    config: Vec<(String, String)>,
    body: String,
    summary: Vec<String>,
    status: Status,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            config: Vec::new(),
            body: String::new(),
            summary: Vec::new(),
            status: Status::Done,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        let _ = writeln!(self.body, "{key}={value}");
        self
    }

    /// Copies already formatted `key=value` lines, prefixing each key.
    pub fn lines(&mut self, prefix: &str, text: &str) -> &mut Self {
        for line in text.lines().filter(|l| !l.is_empty()) {
            let _ = writeln!(self.body, "{prefix}{line}");
        }
        self
    }

    /// A named multi-line block, e.g. a matrix in its text format.
    pub fn block(&mut self, name: &str, text: &str) -> &mut Self {
        let _ = writeln!(self.body, "{name}:");
        self.body.push_str(text);
        if !text.ends_with('\n') {
            self.body.push('\n');
        }
        self
    }

    pub fn summary(&mut self, line: impl Into<String>) -> &mut Self {
        self.summary.push(line.into());
        self
    }

    /// Records a verdict; once failed, a report stays failed.
    pub fn verdict(&mut self, pass: bool) -> &mut Self {
        self.status = match (self.status, pass) {
            (Status::Fail, _) | (_, false) => Status::Fail,
            _ => Status::Pass,
        };
        self
    }

    pub fn status(&self) -> Status {
        self.status
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command={}", self.command)?;
        for (k, v) in &self.config {
            writeln!(f, "config.{k}={v}")?;
        }
        f.write_str(&self.body)?;
        match self.status {
            Status::Pass => writeln!(f, "result=PASS")?,
            Status::Fail => writeln!(f, "result=FAIL")?,
            Status::Done => writeln!(f, "result=DONE")?,
        }
        if !self.summary.is_empty() {
            writeln!(f)?;
            writeln!(f, "summary:")?;
            for line in &self.summary {
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_sticky_failure() {
        let mut r = Report::new("demo");
        r.config("n", 8).kv("length_bits", 48).lines("q.", "a=1\n\nb=2\n");
        r.verdict(false).verdict(true).summary("one line");
        assert_eq!(r.status(), Status::Fail);
        assert_eq!(
            r.to_string(),
            "command=demo\nconfig.n=8\nlength_bits=48\nq.a=1\nq.b=2\nresult=FAIL\n\nsummary:\n  one line\n"
        );
    }

    #[test]
    fn done_without_summary() {
        let mut r = Report::new("gen");
        r.block("matrix", "1 1\n1");
        assert_eq!(r.status(), Status::Done);
        assert_eq!(r.to_string(), "command=gen\nmatrix:\n1 1\n1\nresult=DONE\n");
    }
}

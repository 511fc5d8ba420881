use std::fmt;

use crate::syntax::SourceSpan;

/// One rule application, recorded when its conclusion is reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub rule: &'static str,
    pub span: SourceSpan,
    pub detail: Vec<(&'static str, String)>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule={} span={}", self.rule, self.span)?;
        for (key, value) in &self.detail {
            write!(f, " {key}={value}")?;
        }
        Ok(())
    }
}

pub fn render_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&event.to_string());
        out.push('\n');
    }
    out
}

use std::fmt;

use serde::Serialize;

use crate::eval::Rule;

/// One reduction of the configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub rule: Rule,
    pub threads: Vec<usize>,
    pub channel: Option<String>,
    pub payload: Option<String>,
}

impl TraceEvent {
    pub fn is_communication(&self) -> bool {
        matches!(self.rule, Rule::Close | Rule::Com | Rule::Branch)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "step": self.step,
            "rule": self.rule.name(),
            "threads": self.threads,
            "channel": self.channel,
            "payload": self.payload,
        })
        .to_string()
    }
}

/// `<step> <rule> t<id>[,t<id>] [payload]`, where the payload of a
/// communication is the channel followed by what crossed it.
impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let threads: Vec<String> = self.threads.iter().map(|t| format!("t{t}")).collect();
        write!(f, "{} {} {}", self.step, self.rule, threads.join(","))?;
        let payload: Vec<&str> = [self.channel.as_deref(), self.payload.as_deref()]
            .into_iter()
            .flatten()
            .collect();
        if !payload.is_empty() {
            write!(f, " {}", payload.join(" "))?;
        }
        Ok(())
    }
}

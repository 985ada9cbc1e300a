//! Replays a captured session and checks every message against the
//! message-flow rules: settings only go referee → party, outcomes only
//! party → referee, and nothing ever goes party → party.

use std::collections::HashMap;
use std::collections::HashSet;
use std::io::BufRead;

use serde::Serialize;

use crate::referee::CapturedMessage;
use crate::wire::{Body, Role, WireMessage};
use crate::{NetError, Result};

const MAX_LISTED: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub messages: u64,
    pub rounds_sent: u64,
    pub rounds_answered: u64,
    pub violation_count: u64,
    pub violations: Vec<String>,
    pub verdict: &'static str,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Default)]
struct PartyState {
    hello: bool,
    open: HashSet<u64>,
    sent: u64,
    answered: u64,
    finished: bool,
}

pub fn validate_session<'a, I: IntoIterator<Item = &'a CapturedMessage>>(records: I) -> ConformanceReport {
    let mut parties: HashMap<Role, PartyState> = HashMap::new();
    let mut violations = Vec::new();
    let mut count = 0u64;
    let mut messages = 0u64;
    let mut flag = |i: u64, why: String| {
        count += 1;
        if violations.len() < MAX_LISTED {
            violations.push(format!("message {i}: {why}"));
        }
    };
    for (i, rec) in records.into_iter().enumerate() {
        let i = i as u64;
        messages += 1;
        let msg = match WireMessage::parse(&rec.line) {
            Ok(m) => m,
            Err(e) => {
                flag(i, e.to_string());
                continue;
            }
        };
        let kind = msg.body.kind();
        match (rec.from, rec.to) {
            (Role::Referee, party) if party.is_party() => {
                let st = parties.entry(party).or_default();
                if st.finished {
                    flag(i, format!("{kind} to {party:?} after the summary"));
                }
                match msg.body {
                    Body::Hello { role: Role::Referee, .. } => {}
                    Body::RoundSetting {
                        round_id,
                        setting,
                        setting_pair,
                    } => {
                        if !(1..=3).contains(&setting) {
                            flag(i, format!("setting {setting} outside 1..=3"));
                        }
                        if let Some([j, k]) = setting_pair {
                            let own = if party == Role::Alice { j } else { k };
                            if own != setting || !(1..=3).contains(&j) || !(1..=3).contains(&k) {
                                flag(i, format!("setting pair [{j}, {k}] inconsistent with setting {setting}"));
                            }
                        }
                        if !st.open.insert(round_id) {
                            flag(i, format!("round {round_id} sent to {party:?} twice"));
                        }
                        st.sent += 1;
                    }
                    Body::Summary { .. } | Body::Error { .. } => st.finished = matches!(msg.body, Body::Summary { .. }),
                    _ => flag(i, format!("referee may not send {kind} to {party:?}")),
                }
            }
            (party, Role::Referee) if party.is_party() => {
                let st = parties.entry(party).or_default();
                match msg.body {
                    Body::Hello { role, .. } => {
                        if role != party || st.hello {
                            flag(i, format!("bad hello from {party:?}"));
                        }
                        st.hello = true;
                    }
                    Body::RoundOutcome { round_id, outcome } => {
                        if outcome.iter().any(|&x| x != 1 && x != -1) {
                            flag(i, format!("outcome {outcome:?} is not a ±1 string"));
                        }
                        if st.open.remove(&round_id) {
                            st.answered += 1;
                        } else {
                            flag(i, format!("{party:?} answered round {round_id}, which is not open for it"));
                        }
                    }
                    Body::Error { round_id, .. } => {
                        if let Some(id) = round_id {
                            if !st.open.remove(&id) {
                                flag(i, format!("{party:?} refused round {id}, which is not open for it"));
                            }
                        }
                    }
                    _ => flag(i, format!("party may not send {kind}")),
                }
                if !st.hello {
                    flag(i, format!("{party:?} spoke before its hello"));
                }
            }
            (from, to) => flag(i, format!("{kind} from {from:?} to {to:?} is outside the message-flow pattern")),
        }
    }
    let rounds_sent = parties.values().map(|s| s.sent).sum();
    let rounds_answered = parties.values().map(|s| s.answered).sum();
    ConformanceReport {
        messages,
        rounds_sent,
        rounds_answered,
        violation_count: count,
        violations,
        verdict: if count == 0 { "PASS" } else { "FAIL" },
    }
}

pub fn read_capture<R: BufRead>(r: R) -> Result<Vec<CapturedMessage>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(|e| NetError::Malformed(format!("capture: {e}")))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(from: Role, to: Role, line: &str) -> CapturedMessage {
        CapturedMessage { from, to, line: line.into() }
    }

    fn clean() -> Vec<CapturedMessage> {
        vec![
            rec(Role::Alice, Role::Referee, r#"{"v":1,"kind":"hello","role":"alice"}"#),
            rec(Role::Bob, Role::Referee, r#"{"v":1,"kind":"hello","role":"bob"}"#),
            rec(Role::Referee, Role::Alice, r#"{"v":1,"kind":"round_setting","round_id":0,"setting":2}"#),
            rec(Role::Referee, Role::Bob, r#"{"v":1,"kind":"round_setting","round_id":0,"setting":3}"#),
            rec(
                Role::Bob,
                Role::Referee,
                r#"{"v":1,"kind":"round_outcome","round_id":0,"outcome":[1,1,-1]}"#,
            ),
            rec(
                Role::Alice,
                Role::Referee,
                r#"{"v":1,"kind":"round_outcome","round_id":0,"outcome":[1,-1,-1]}"#,
            ),
        ]
    }

    #[test]
    fn clean_session_passes() {
        let r = validate_session(&clean());
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!((r.rounds_sent, r.rounds_answered), (2, 2));
    }

    #[test]
    fn rejects_out_of_pattern_messages() {
        let injected = [
            rec(Role::Alice, Role::Bob, r#"{"v":1,"kind":"round_outcome","round_id":0,"outcome":[1,1,1]}"#),
            rec(Role::Alice, Role::Referee, r#"{"v":1,"kind":"round_setting","round_id":0,"setting":1}"#),
            rec(
                Role::Referee,
                Role::Bob,
                r#"{"v":1,"kind":"round_outcome","round_id":0,"outcome":[1,1,1]}"#,
            ),
            rec(Role::Referee, Role::Bob, r#"{"v":1,"kind":"round_setting","round_id":9,"setting":4}"#),
            rec(
                Role::Alice,
                Role::Referee,
                r#"{"v":1,"kind":"round_outcome","round_id":5,"outcome":[1,1,1]}"#,
            ),
            rec(
                Role::Alice,
                Role::Referee,
                r#"{"v":2,"kind":"round_outcome","round_id":0,"outcome":[1,1,1]}"#,
            ),
            rec(Role::Alice, Role::Referee, r#"{"kind":"round_outcome","round_id":0,"outcome":[1,1,1]}"#),
        ];
        for bad in injected {
            let mut s = clean();
            s.insert(4, bad.clone());
            assert!(!validate_session(&s).passed(), "accepted {bad:?}");
        }
    }
}

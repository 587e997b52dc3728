//! Line-oriented scripts run inside one locked session.
//!
//! Each line is a CLI command without the program name or global flags, a
//! variable binding, or an expectation:
//!
//! ```text
//! # comment
//! keys gen --name alice
//! tx revocable-pay --from @alice.vault --to @mallory --amount 40 --delay 3
//! let theft = $last
//! expect reject revoke-window-expired tx revoke --from @alice.vault --target $theft
//! expect balance @bob 40 pending-in=0
//! expect status $theft revoked
//! expect receipt $theft applied
//! expect vault @alice.vault frozen
//! expect height 7
//! ```
//!
//! `$last` is the id of the most recent transaction submitted by the script.

use std::collections::HashMap;

use clap::Parser;
use serde_json::json;
use vaultchain_core::{Receipt, TxId};

use crate::args::{Command, ScriptLine};
use crate::error::CliError;
use crate::session::{status_text, Outcome, Session};

struct Runner<'a> {
    session: &'a mut Session,
    vars: HashMap<String, String>,
    transcript: Vec<String>,
}

/// Runs `text` line by line. Stops at the first failing line, with the line
/// number folded into the error.
pub fn run_script(session: &mut Session, text: &str) -> Result<Outcome, CliError> {
    let mut runner = Runner {
        session,
        vars: HashMap::new(),
        transcript: Vec::new(),
    };
    let mut commands = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        commands += 1;
        runner.line(line).map_err(|e| at_line(e, idx + 1, line))?;
    }
    let chain = runner.session.chain()?;
    let head = chain.head().clone();
    let mut human = runner.transcript;
    human.push(format!(
        "scenario ok: {commands} lines, height {}, state digest {}",
        head.height, head.state_digest
    ));
    Ok(Outcome {
        human: human.join("\n"),
        json: json!({
            "ok": true,
            "lines": commands,
            "height": head.height,
            "state_digest": head.state_digest,
        }),
        tx: None,
    })
}

fn at_line(e: CliError, n: usize, line: &str) -> CliError {
    let ctx = format!("line {n}: {line}");
    match e {
        CliError::Usage(m) => CliError::Usage(format!("{ctx}: {m}")),
        CliError::Rejected { code, detail } => CliError::Rejected {
            code,
            detail: Some(match detail {
                Some(d) => format!("{d}; {ctx}"),
                None => ctx,
            }),
        },
        CliError::Integrity(m) => CliError::Integrity(format!("{ctx}: {m}")),
        CliError::Io { context, source } => CliError::Io {
            context: format!("{ctx}: {context}"),
            source,
        },
    }
}

fn expectation(msg: String) -> CliError {
    CliError::rejected("expectation-failed", msg)
}

impl Runner<'_> {
    fn line(&mut self, line: &str) -> Result<(), CliError> {
        let tokens = shlex::split(line)
            .ok_or_else(|| CliError::usage("unbalanced quotes"))?
            .into_iter()
            .map(|t| self.substitute(&t))
            .collect::<Result<Vec<_>, _>>()?;
        self.transcript.push(format!("> {line}"));
        match tokens.first().map(String::as_str) {
            Some("let") => match tokens.as_slice() {
                [_, name, eq, value] if eq == "=" && !name.starts_with('$') => {
                    self.vars.insert(name.clone(), value.clone());
                    Ok(())
                }
                _ => Err(CliError::usage("expected `let NAME = VALUE`")),
            },
            Some("expect") => self.expect(&tokens[1..]),
            _ => {
                let out = self.command(&tokens)?;
                if !out.human.is_empty() {
                    self.transcript.push(out.human);
                }
                Ok(())
            }
        }
    }

    fn substitute(&self, token: &str) -> Result<String, CliError> {
        match token.strip_prefix('$') {
            Some(name) => self
                .vars
                .get(name)
                .cloned()
                .ok_or_else(|| CliError::usage(format!("unset variable ${name}"))),
            None => Ok(token.to_owned()),
        }
    }

    fn command(&mut self, tokens: &[String]) -> Result<Outcome, CliError> {
        let parsed = ScriptLine::try_parse_from(tokens)
            .map_err(|e| CliError::usage(e.render().to_string().trim_end().to_owned()))?;
        if matches!(
            parsed.command,
            Command::RunScenario(_) | Command::Workload(_)
        ) {
            return Err(CliError::usage("not allowed inside a scenario"));
        }
        let out = self.session.execute(parsed.command)?;
        if let Some(id) = &out.tx {
            self.vars.insert("last".into(), id.to_string());
        }
        Ok(out)
    }

    fn expect(&mut self, args: &[String]) -> Result<(), CliError> {
        let arg = |i: usize| {
            args.get(i)
                .map(String::as_str)
                .ok_or_else(|| CliError::usage("incomplete expect directive"))
        };
        match arg(0)? {
            "reject" => {
                let code = arg(1)?;
                match self.command(&args[2..]) {
                    Err(e) if e.reject_code() == Some(code) => Ok(()),
                    Err(e) => Err(expectation(format!("wanted rejection {code}, got: {e}"))),
                    Ok(_) => Err(expectation(format!(
                        "wanted rejection {code}, command succeeded"
                    ))),
                }
            }
            "balance" => {
                let addr = self.session.resolve_address(arg(1)?)?;
                let report = self.session.chain()?.state().balance_query(&addr)?;
                for check in &args[2..] {
                    let (field, want) = check.split_once('=').unwrap_or(("spendable", check));
                    let want: u64 = want
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad amount in {check:?}")))?;
                    let got = match field {
                        "spendable" => report.spendable,
                        "pending-out" => report.pending_out.total,
                        "pending-in" => report.pending_in.total,
                        other => {
                            return Err(CliError::usage(format!("unknown balance field {other}")))
                        }
                    }
                    .atoms();
                    if got != want {
                        return Err(expectation(format!(
                            "{field} of {addr} is {got}, expected {want}"
                        )));
                    }
                }
                Ok(())
            }
            "status" => {
                let id: TxId = arg(1)?
                    .parse()
                    .map_err(|e| CliError::usage(format!("bad transaction id: {e}")))?;
                let want = arg(2)?;
                let got = self
                    .session
                    .chain()?
                    .state()
                    .pending_transfer(&id)
                    .map(|(_, p)| status_text(p.status))
                    .unwrap_or("absent");
                if got != want {
                    return Err(expectation(format!("{id} is {got}, expected {want}")));
                }
                Ok(())
            }
            "receipt" => {
                let id: TxId = arg(1)?
                    .parse()
                    .map_err(|e| CliError::usage(format!("bad transaction id: {e}")))?;
                let want = arg(2)?;
                let got = match self.session.chain()?.find_tx(&id) {
                    Some((_, entry)) => match entry.receipt {
                        Receipt::Applied => "applied",
                        Receipt::Rejected(r) => r.code(),
                    },
                    None => "not-included",
                };
                if got != want {
                    return Err(expectation(format!("{id} receipt {got}, expected {want}")));
                }
                Ok(())
            }
            "vault" => {
                let addr = self.session.resolve_address(arg(1)?)?;
                let want = arg(2)?;
                let chain = self.session.chain()?;
                let vault = chain
                    .state()
                    .account(&addr)
                    .and_then(|a| a.vault.as_ref())
                    .ok_or_else(|| expectation(format!("{addr} is not a vault")))?;
                let got = if vault.closed {
                    "closed"
                } else if vault.frozen {
                    "frozen"
                } else {
                    "active"
                };
                if got != want {
                    return Err(expectation(format!("{addr} is {got}, expected {want}")));
                }
                Ok(())
            }
            "height" => {
                let want: u64 = arg(1)?.parse().map_err(|_| CliError::usage("bad height"))?;
                let got = self.session.chain()?.height();
                if got != want {
                    return Err(expectation(format!("height is {got}, expected {want}")));
                }
                Ok(())
            }
            other => Err(CliError::usage(format!("unknown expectation {other:?}"))),
        }
    }
}

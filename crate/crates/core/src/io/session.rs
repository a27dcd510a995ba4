//! Scripted serial sessions against the simulated gripper.
//!
//! A transcript holds one stamped line per entry:
//!
//! ```text
//! # t_ms payload
//! 0     CLOSE
//! 500   SET FTHR 300
//! 800   !force 320
//! 900   !button open
//! 6000  !end
//! ```
//!
//! Plain payloads are sent over the serial line as typed. Payloads starting
//! with `!` drive the simulated hardware instead: `!force <gf>` sets the
//! load-cell reading, `!button open|close` presses a button for one tick and
//! `!end` stops the session. Without `!end` the session runs for
//! [`SessionOptions::tail_ms`] after the last entry.
//!
//! The session log is the byte stream the gripper writes back: command
//! replies, telemetry and overflow notices, in order.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::firmware::protocol::{format_dropped, format_reply, format_telemetry, parse_command};
use crate::firmware::{Buttons, ControllerConfig};
use crate::pneumatics::PneumaticParams;
use crate::rig::{Rig, Start, DEFAULT_DT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    Force(f64),
    Button(Buttons),
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Serial(String),
    Hardware(Directive),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub t_ms: u64,
    pub payload: Payload,
    /// Source line, 1-based.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionOptions {
    pub start: Start,
    pub dt: f64,
    /// Telemetry is drained every this many firmware ticks.
    pub drain_every_ticks: u32,
    pub tail_ms: u64,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            start: Start::Opened,
            dt: DEFAULT_DT,
            drain_every_ticks: 1,
            tail_ms: 10_000,
        }
    }
}

pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        // `#` starts a comment anywhere on the line
        let trimmed = raw.split('#').next().unwrap_or("").trim();
        if trimmed.is_empty() {
            continue;
        }
        let (stamp, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let t_ms: u64 = stamp.parse().map_err(|_| Error::Config {
            line,
            message: format!("`{stamp}` is not a millisecond timestamp"),
        })?;
        let rest = rest.trim();
        let payload = match rest.strip_prefix('!') {
            Some(d) => Payload::Hardware(parse_directive(d).ok_or_else(|| Error::Config {
                line,
                message: format!("unknown directive `!{d}`"),
            })?),
            None => Payload::Serial(rest.to_string()),
        };
        out.push(TranscriptEntry { t_ms, payload, line });
    }
    out.sort_by_key(|e| e.t_ms);
    Ok(out)
}

fn parse_directive(d: &str) -> Option<Directive> {
    let tokens: Vec<&str> = d.split_whitespace().collect();
    match tokens.as_slice() {
        ["force", v] => v.parse().ok().filter(|f: &f64| f.is_finite()).map(Directive::Force),
        ["button", "open"] => Some(Directive::Button(Buttons { open: true, close: false })),
        ["button", "close"] => Some(Directive::Button(Buttons { open: false, close: true })),
        ["end"] => Some(Directive::End),
        _ => None,
    }
}

/// Runs the transcript and returns the session log.
pub fn run_session(
    entries: &[TranscriptEntry],
    controller: &ControllerConfig,
    pneumatics: &PneumaticParams,
    opts: &SessionOptions,
) -> Result<String> {
    if opts.drain_every_ticks == 0 {
        return Err(Error::invalid("drain_every_ticks", "must be at least 1"));
    }
    let mut rig = Rig::new(controller.clone(), *pneumatics, opts.dt, opts.start)?;
    let end_ms = entries
        .iter()
        .find(|e| e.payload == Payload::Hardware(Directive::End))
        .map(|e| e.t_ms)
        .unwrap_or_else(|| entries.last().map_or(0, |e| e.t_ms) + opts.tail_ms);

    let mut log = String::new();
    let mut next = 0;
    let mut force = 0.0;
    let mut buttons = Buttons::default();
    let mut ticks: u64 = 0;
    let mut dropped_seen = 0;

    loop {
        let now_ms = (rig.time() * 1000.0).round() as u64;
        if now_ms > end_ms {
            break;
        }
        if rig.tick_due() {
            // receive
            while let Some(e) = entries.get(next).filter(|e| e.t_ms <= now_ms) {
                next += 1;
                match &e.payload {
                    Payload::Serial(text) => {
                        if let Some(reply) = parse_command(text) {
                            if let Ok(cmd) = reply {
                                rig.send(cmd);
                            }
                            log.push_str(&format_reply(&reply));
                        }
                    }
                    Payload::Hardware(Directive::Force(f)) => force = *f,
                    Payload::Hardware(Directive::Button(b)) => {
                        buttons.open |= b.open;
                        buttons.close |= b.close;
                    }
                    Payload::Hardware(Directive::End) => {}
                }
            }
        }
        // tick
        if rig.step(force, buttons)?.is_some() {
            buttons = Buttons::default();
            ticks += 1;
            // send
            if ticks.is_multiple_of(u64::from(opts.drain_every_ticks)) {
                let fw = rig.firmware_mut();
                let dropped = fw.telemetry().dropped();
                if dropped > dropped_seen {
                    log.push_str(&format_dropped(dropped));
                    dropped_seen = dropped;
                }
                for q in fw.telemetry().drain() {
                    let _ = write!(log, "{}", format_telemetry(&q));
                }
            }
        }
    }
    Ok(log)
}

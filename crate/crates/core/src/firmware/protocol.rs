//! Line-based ASCII serial protocol.
//!
//! Outbound telemetry, one record per firmware tick:
//!
//! ```text
//! Q <t_ms> <state> <P_kpa> <F_gf>
//! ```
//!
//! Inbound commands are `OPEN`, `CLOSE` and `SET FTHR <gf>`, each answered
//! with `OK` or `ERR <reason>`. Every line ends with `\n`.

use std::fmt;

use super::automaton::{StateVector, UserCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolError {
    UnknownCommand,
    BadArgument,
}

impl ProtocolError {
    pub fn reason(&self) -> &'static str {
        match self {
            ProtocolError::UnknownCommand => "unknown-command",
            ProtocolError::BadArgument => "bad-argument",
        }
    }
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.reason())
    }
}

impl std::error::Error for ProtocolError {}

/// Parses one inbound line. Blank lines yield `None`.
pub fn parse_command(line: &str) -> Option<Result<UserCommand, ProtocolError>> {
    let mut tokens = line.split_ascii_whitespace();
    let head = tokens.next()?;
    let rest: Vec<&str> = tokens.collect();
    let parsed = match (head, rest.as_slice()) {
        ("OPEN", []) => Ok(UserCommand::Open),
        ("CLOSE", []) => Ok(UserCommand::Close),
        ("OPEN" | "CLOSE", _) => Err(ProtocolError::BadArgument),
        ("SET", ["FTHR", value]) => match value.parse::<f64>() {
            Ok(gf) if gf.is_finite() && gf > 0.0 => Ok(UserCommand::SetForceThreshold(gf)),
            _ => Err(ProtocolError::BadArgument),
        },
        ("SET", ["FTHR", ..]) => Err(ProtocolError::BadArgument),
        _ => Err(ProtocolError::UnknownCommand),
    };
    Some(parsed)
}

pub fn format_reply(reply: &Result<UserCommand, ProtocolError>) -> String {
    match reply {
        Ok(_) => "OK\n".to_string(),
        Err(e) => format!("ERR {}\n", e.reason()),
    }
}

pub fn format_telemetry(q: &StateVector) -> String {
    format!(
        "Q {} {} {} {}\n",
        (q.t * 1000.0).round() as i64,
        q.k_gr.code(),
        fixed2(q.pressure_kpa),
        fixed2(q.force_gf)
    )
}

pub fn format_dropped(total: u64) -> String {
    format!("DROPPED {total}\n")
}

/// Two-decimal rendering that never prints a negative zero.
fn fixed2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firmware::automaton::GripperStateKind;

    #[test]
    fn parses_commands() {
        assert_eq!(parse_command("OPEN"), Some(Ok(UserCommand::Open)));
        assert_eq!(parse_command("CLOSE\r"), Some(Ok(UserCommand::Close)));
        assert_eq!(
            parse_command("SET FTHR 300"),
            Some(Ok(UserCommand::SetForceThreshold(300.0)))
        );
        assert_eq!(parse_command("   "), None);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_command("HELLO"), Some(Err(ProtocolError::UnknownCommand)));
        assert_eq!(parse_command("open"), Some(Err(ProtocolError::UnknownCommand)));
        assert_eq!(parse_command("SET FTHR -3"), Some(Err(ProtocolError::BadArgument)));
        assert_eq!(parse_command("SET FTHR abc"), Some(Err(ProtocolError::BadArgument)));
        assert_eq!(parse_command("SET FTHR"), Some(Err(ProtocolError::BadArgument)));
        assert_eq!(parse_command("SET GAIN 3"), Some(Err(ProtocolError::UnknownCommand)));
        assert_eq!(parse_command("OPEN NOW"), Some(Err(ProtocolError::BadArgument)));
    }

    #[test]
    fn reply_format() {
        assert_eq!(format_reply(&Ok(UserCommand::Open)), "OK\n");
        assert_eq!(
            format_reply(&Err(ProtocolError::UnknownCommand)),
            "ERR unknown-command\n"
        );
    }

    #[test]
    fn telemetry_format() {
        let q = StateVector {
            t: 4.31,
            k_gr: GripperStateKind::Closing,
            pressure_kpa: -20.994,
            force_gf: 350.0,
        };
        assert_eq!(format_telemetry(&q), "Q 4310 CLOSING -20.99 350.00\n");
        let q = StateVector {
            t: 0.0,
            k_gr: GripperStateKind::Undefined,
            pressure_kpa: -0.001,
            force_gf: 0.0,
        };
        assert_eq!(format_telemetry(&q), "Q 0 UNDEF 0.00 0.00\n");
    }
}

//! Line-oriented parser for the netlist text format.
//!
//! Grammar (one directive per line, `*` starts a comment):
//!
//! ```text
//! .meta <key> <value...>
//! .supply vdd <net> | .supply gnd <net>
//! .input <net> [<net> ...]
//! .output <net> [<net> ...]
//! .net <net> [<net> ...]
//! M<name> <drain> <gate> <source> <PMOS|NMOS> [delay=<int>fs]
//! .end
//! ```
//!
//! Every device terminal must reference a declared net; referencing an
//! undeclared net is a parse error carrying the offending name and location.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Device, Net, NetKind, Netlist, Polarity};

/// Parse failure with 1-based line and column of the offending token.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

struct LineTokens<'a> {
    line_no: usize,
    tokens: Vec<(usize, &'a str)>,
}

fn tokenize(text: &str) -> Vec<LineTokens<'_>> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('*') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut tokens = Vec::new();
        let mut col = 0;
        for piece in line.split_whitespace() {
            let at = line[col..].find(piece).map(|p| p + col).unwrap_or(col);
            tokens.push((at + 1, piece));
            col = at + piece.len();
        }
        if !tokens.is_empty() {
            lines.push(LineTokens {
                line_no: idx + 1,
                tokens,
            });
        }
    }
    lines
}

/// Parses netlist text into a [`Netlist`].
pub fn parse_netlist(text: &[u8]) -> Result<Netlist, ParseError> {
    let text = std::str::from_utf8(text)
        .map_err(|_| ParseError::new(1, 1, "input is not valid UTF-8"))?;
    let lines = tokenize(text);

    let mut nets: Vec<Net> = Vec::new();
    let mut devices: Vec<Device> = Vec::new();
    let mut metadata = BTreeMap::new();
    let mut ended = false;

    fn declare(
        nets: &mut Vec<Net>,
        name: &str,
        kind: NetKind,
        line: usize,
        col: usize,
    ) -> Result<(), ParseError> {
        if nets.iter().any(|n| n.name == name) {
            return Err(ParseError::new(
                line,
                col,
                format!("net `{}` declared more than once", name),
            ));
        }
        nets.push(Net {
            name: name.to_string(),
            kind,
        });
        Ok(())
    }

    for lt in &lines {
        if ended {
            return Err(ParseError::new(
                lt.line_no,
                lt.tokens[0].0,
                "content after .end",
            ));
        }
        let (col0, head) = lt.tokens[0];
        match head {
            ".meta" => {
                if lt.tokens.len() < 3 {
                    return Err(ParseError::new(lt.line_no, col0, ".meta needs a key and a value"));
                }
                let key = lt.tokens[1].1.to_string();
                let value = lt.tokens[2..]
                    .iter()
                    .map(|(_, t)| *t)
                    .collect::<Vec<_>>()
                    .join(" ");
                metadata.insert(key, value);
            }
            ".supply" => {
                if lt.tokens.len() != 3 {
                    return Err(ParseError::new(
                        lt.line_no,
                        col0,
                        ".supply needs a rail keyword (vdd|gnd) and one net",
                    ));
                }
                let kind = match lt.tokens[1].1 {
                    "vdd" => NetKind::SupplyHigh,
                    "gnd" => NetKind::SupplyLow,
                    other => {
                        return Err(ParseError::new(
                            lt.line_no,
                            lt.tokens[1].0,
                            format!("unknown supply rail `{}` (expected vdd or gnd)", other),
                        ))
                    }
                };
                declare(&mut nets, lt.tokens[2].1, kind, lt.line_no, lt.tokens[2].0)?;
            }
            ".input" | ".output" | ".net" => {
                if lt.tokens.len() < 2 {
                    return Err(ParseError::new(
                        lt.line_no,
                        col0,
                        format!("{} needs at least one net name", head),
                    ));
                }
                let kind = match head {
                    ".input" => NetKind::Input,
                    ".output" => NetKind::Output,
                    _ => NetKind::Signal,
                };
                for (col, name) in &lt.tokens[1..] {
                    declare(&mut nets, name, kind, lt.line_no, *col)?;
                }
            }
            ".end" => {
                ended = true;
            }
            tok if tok.starts_with('M') || tok.starts_with('m') => {
                let name = &tok[1..];
                if name.is_empty() {
                    return Err(ParseError::new(lt.line_no, col0, "device line has no name after M"));
                }
                if lt.tokens.len() < 5 {
                    return Err(ParseError::new(
                        lt.line_no,
                        col0,
                        "device line needs drain, gate, source, and polarity",
                    ));
                }
                if devices.iter().any(|d| d.name == name) {
                    return Err(ParseError::new(
                        lt.line_no,
                        col0,
                        format!("duplicate device name `{}`", name),
                    ));
                }
                let terminal = |i: usize| -> Result<String, ParseError> {
                    let (col, net) = lt.tokens[i];
                    if !nets.iter().any(|n| n.name == net) {
                        return Err(ParseError::new(
                            lt.line_no,
                            col,
                            format!("device `{}` references undeclared net `{}`", name, net),
                        ));
                    }
                    Ok(net.to_string())
                };
                let drain = terminal(1)?;
                let gate = terminal(2)?;
                let source = terminal(3)?;
                if drain == gate {
                    return Err(ParseError::new(
                        lt.line_no,
                        lt.tokens[2].0,
                        format!("device `{}` has drain and gate on the same net", name),
                    ));
                }
                let polarity = match lt.tokens[4].1 {
                    "PMOS" | "pmos" => Polarity::Pmos,
                    "NMOS" | "nmos" => Polarity::Nmos,
                    other => {
                        return Err(ParseError::new(
                            lt.line_no,
                            lt.tokens[4].0,
                            format!("unknown polarity `{}` (expected PMOS or NMOS)", other),
                        ))
                    }
                };
                let mut delay_fs = None;
                for (col, attr) in &lt.tokens[5..] {
                    if let Some(rest) = attr.strip_prefix("delay=") {
                        let digits = rest.strip_suffix("fs").ok_or_else(|| {
                            ParseError::new(lt.line_no, *col, "delay attribute must end in `fs`")
                        })?;
                        let fs = digits.parse::<u64>().map_err(|_| {
                            ParseError::new(
                                lt.line_no,
                                *col,
                                format!("invalid delay value `{}`", digits),
                            )
                        })?;
                        delay_fs = Some(fs);
                    } else {
                        return Err(ParseError::new(
                            lt.line_no,
                            *col,
                            format!("unknown device attribute `{}`", attr),
                        ));
                    }
                }
                devices.push(Device {
                    name: name.to_string(),
                    polarity,
                    drain,
                    gate,
                    source,
                    delay_fs,
                });
            }
            other => {
                return Err(ParseError::new(
                    lt.line_no,
                    col0,
                    format!("unrecognized directive `{}`", other),
                ));
            }
        }
    }

    if nets.iter().all(|n| n.kind != NetKind::SupplyHigh)
        || nets.iter().all(|n| n.kind != NetKind::SupplyLow)
    {
        return Err(ParseError::new(
            lines.last().map(|l| l.line_no).unwrap_or(1),
            1,
            "missing .supply declarations (need both vdd and gnd)",
        ));
    }

    Ok(Netlist {
        nets,
        devices,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INVERTER: &str = "\
.supply vdd VDD
.supply gnd GND
.input in
.output out
MP1 out in VDD PMOS
MN1 out in GND NMOS
.end
";

    #[test]
    fn parses_minimal_inverter() {
        let n = parse_netlist(INVERTER.as_bytes()).unwrap();
        assert_eq!(n.devices.len(), 2);
        assert_eq!(n.nets.len(), 4);
        assert_eq!(n.supply_high(), Some("VDD"));
        assert_eq!(n.inputs(), vec!["in"]);
    }

    #[test]
    fn undeclared_net_names_net_and_line() {
        let text = "\
.supply vdd VDD
.supply gnd GND
.input a
MN1 W9 a GND NMOS
.end
";
        let err = parse_netlist(text.as_bytes()).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("W9"), "message: {}", err.message);
    }

    #[test]
    fn duplicate_device_rejected() {
        let text = "\
.supply vdd VDD
.supply gnd GND
.input a
.net b
MN1 b a GND NMOS
MN1 b a GND NMOS
.end
";
        let err = parse_netlist(text.as_bytes()).unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn missing_supply_rejected() {
        let text = ".input a\n.net b\nMN1 b a b NMOS\n.end\n";
        // Device source net reuse is fine; the missing supplies are the error.
        let err = parse_netlist(text.as_bytes()).unwrap_err();
        assert!(err.message.contains("supply"));
    }

    #[test]
    fn comments_and_delay_attributes() {
        let text = "\
* a tiny circuit
.supply vdd VDD
.supply gnd GND
.input a
.output z
MN1 z a GND NMOS delay=250fs * trailing comment
.end
";
        let n = parse_netlist(text.as_bytes()).unwrap();
        assert_eq!(n.devices[0].delay_fs, Some(250));
    }

    #[test]
    fn roundtrip_inverter() {
        let n = parse_netlist(INVERTER.as_bytes()).unwrap();
        let again = parse_netlist(n.serialize().as_bytes()).unwrap();
        assert_eq!(n, again);
    }
}

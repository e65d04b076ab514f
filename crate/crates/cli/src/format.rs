//! Line-oriented text formats for games and adversary strategies.
//!
//! Both formats are whitespace separated, one directive per line, with `#`
//! starting a comment. Indices are 0-based. Serialization writes numbers in
//! Rust's shortest round-trip form, so parsing a serialized value is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use bell_asym_core::{Error, EveStrategy, GameTable, Party, StochasticMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {what} index {index} is out of range (0..{bound})")]
    Range {
        line: usize,
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("line {line}: duplicate {what}")]
    Duplicate { line: usize, what: String },
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Non-empty lines with comments removed, tokenized, with 1-based numbers.
fn directives(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_number(line: usize, token: &str) -> Result<f64, FormatError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(line, format!("`{token}` is not a finite number"))),
    }
}

fn parse_index(
    line: usize,
    token: &str,
    what: &'static str,
    bound: usize,
) -> Result<usize, FormatError> {
    let index = token
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("`{token}` is not a {what} index")))?;
    if index >= bound {
        return Err(FormatError::Range {
            line,
            what,
            index,
            bound,
        });
    }
    Ok(index)
}

fn parse_party(line: usize, token: &str) -> Result<Party, FormatError> {
    match token {
        "A" => Ok(Party::A),
        "B" => Ok(Party::B),
        _ => Err(syntax(
            line,
            format!("expected party A or B, found `{token}`"),
        )),
    }
}

/// Parses `A=<n> B=<n>` with positive counts.
fn parse_counts(
    line: usize,
    directive: &str,
    tokens: &[&str],
) -> Result<(usize, usize), FormatError> {
    let usage = || syntax(line, format!("expected `{directive} A=<n> B=<n>`"));
    if tokens.len() != 3 {
        return Err(usage());
    }
    let count = |token: &str, key: &str| -> Result<usize, FormatError> {
        let n = token
            .strip_prefix(key)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(usage)?;
        if n == 0 {
            return Err(syntax(line, format!("{directive} counts must be positive")));
        }
        Ok(n)
    };
    Ok((count(tokens[1], "A=")?, count(tokens[2], "B=")?))
}

fn numbers(line: usize, tokens: &[&str]) -> Result<Vec<f64>, FormatError> {
    tokens.iter().map(|t| parse_number(line, t)).collect()
}

/// Parses a game file. Unlisted coefficients are 0 and unlisted marginals
/// are uniform.
pub fn parse_game(text: &str) -> Result<GameTable, FormatError> {
    let mut settings: Option<(usize, usize)> = None;
    let mut outcomes: Option<(usize, usize)> = None;
    let mut marginals: [Option<Vec<f64>>; 2] = [None, None];
    let mut coeffs: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    let mut last_line = 0;

    for (line, tokens) in directives(text) {
        last_line = line;
        match tokens[0] {
            "settings" => {
                if settings.is_some() {
                    return Err(FormatError::Duplicate {
                        line,
                        what: "settings line".into(),
                    });
                }
                settings = Some(parse_counts(line, "settings", &tokens)?);
            }
            "outcomes" => {
                if settings.is_none() {
                    return Err(syntax(line, "`settings` must come before `outcomes`"));
                }
                if outcomes.is_some() {
                    return Err(FormatError::Duplicate {
                        line,
                        what: "outcomes line".into(),
                    });
                }
                outcomes = Some(parse_counts(line, "outcomes", &tokens)?);
            }
            "marginal" | "coeff" if outcomes.is_none() => {
                return Err(syntax(line, "`settings` and `outcomes` must come first"));
            }
            "marginal" => {
                let (n_a, n_b) = settings.expect("checked above");
                if tokens.len() < 2 {
                    return Err(syntax(line, "expected `marginal A|B <p0> ...`"));
                }
                let party = parse_party(line, tokens[1])?;
                let n = if party == Party::A { n_a } else { n_b };
                if tokens.len() != n + 2 {
                    return Err(syntax(
                        line,
                        format!(
                            "marginal {party} needs {n} values, found {}",
                            tokens.len() - 2
                        ),
                    ));
                }
                let slot = &mut marginals[party as usize];
                if slot.is_some() {
                    return Err(FormatError::Duplicate {
                        line,
                        what: format!("marginal {party}"),
                    });
                }
                *slot = Some(numbers(line, &tokens[2..])?);
            }
            "coeff" => {
                let (n_a, n_b) = settings.expect("checked above");
                let (m_a, m_b) = outcomes.expect("checked above");
                if tokens.len() != 6 {
                    return Err(syntax(line, "expected `coeff <x> <a> <y> <b> <value>`"));
                }
                let key = (
                    parse_index(line, tokens[1], "x", n_a)?,
                    parse_index(line, tokens[2], "a", m_a)?,
                    parse_index(line, tokens[3], "y", n_b)?,
                    parse_index(line, tokens[4], "b", m_b)?,
                );
                let value = parse_number(line, tokens[5])?;
                if coeffs.insert(key, value).is_some() {
                    let (x, a, y, b) = key;
                    return Err(FormatError::Duplicate {
                        line,
                        what: format!("coefficient ({x}, {a}, {y}, {b})"),
                    });
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let (Some(settings), Some(outcomes)) = (settings, outcomes) else {
        return Err(syntax(
            last_line.max(1),
            "missing `settings` or `outcomes` line",
        ));
    };
    let mut g = GameTable::zeros(settings, outcomes)?;
    let mut table = g.coefficients().to_vec();
    for (&(x, a, y, b), &v) in &coeffs {
        table[g.index(x, a, y, b)] = v;
    }
    let [ma, mb] = marginals;
    g = GameTable::new(settings, outcomes, table, ma, mb)?;
    Ok(g)
}

/// Writes a game in the format read by [`parse_game`]. Zero coefficients are
/// omitted; marginals are written only when not uniform.
pub fn serialize_game(g: &GameTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "settings A={} B={}",
        g.n_settings_a(),
        g.n_settings_b()
    );
    let _ = writeln!(
        out,
        "outcomes A={} B={}",
        g.n_outcomes_a(),
        g.n_outcomes_b()
    );
    if !g.has_uniform_marginals() {
        for party in [Party::A, Party::B] {
            let _ = write!(out, "marginal {party}");
            for p in g.marginal(party) {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
    }
    for (x, a, y, b, v) in g.entries() {
        if v != 0.0 {
            let _ = writeln!(out, "coeff {x} {a} {y} {b} {v}");
        }
    }
    out
}

/// Parses a strategy file. Setting and outcome counts are read off the
/// `setdist` and `response` rows; unlisted weights are 0.
pub fn parse_strategy(text: &str) -> Result<EveStrategy, FormatError> {
    let mut alphabet: Option<(usize, usize)> = None;
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut setdist: [BTreeMap<usize, Vec<f64>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let mut responses: [BTreeMap<(usize, usize), Vec<f64>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let mut last_line = 0;

    for (line, tokens) in directives(text) {
        last_line = line;
        if tokens[0] == "alphabet" {
            if alphabet.is_some() {
                return Err(FormatError::Duplicate {
                    line,
                    what: "alphabet line".into(),
                });
            }
            alphabet = Some(parse_counts(line, "alphabet", &tokens)?);
            continue;
        }
        let Some((la, lb)) = alphabet else {
            return Err(syntax(line, "`alphabet` must come first"));
        };
        let size = |party: Party| if party == Party::A { la } else { lb };
        match tokens[0] {
            "weight" => {
                if tokens.len() != 4 {
                    return Err(syntax(line, "expected `weight <l1> <l2> <value>`"));
                }
                let key = (
                    parse_index(line, tokens[1], "l1", la)?,
                    parse_index(line, tokens[2], "l2", lb)?,
                );
                if weights
                    .insert(key, parse_number(line, tokens[3])?)
                    .is_some()
                {
                    return Err(FormatError::Duplicate {
                        line,
                        what: format!("weight ({}, {})", key.0, key.1),
                    });
                }
            }
            "setdist" => {
                if tokens.len() < 4 {
                    return Err(syntax(line, "expected `setdist A|B <l> <p0> ...`"));
                }
                let party = parse_party(line, tokens[1])?;
                let l = parse_index(line, tokens[2], "hidden value", size(party))?;
                if setdist[party as usize]
                    .insert(l, numbers(line, &tokens[3..])?)
                    .is_some()
                {
                    return Err(FormatError::Duplicate {
                        line,
                        what: format!("setdist {party} {l}"),
                    });
                }
            }
            "response" => {
                if tokens.len() < 5 {
                    return Err(syntax(
                        line,
                        "expected `response A|B <l> <setting> <p0> ...`",
                    ));
                }
                let party = parse_party(line, tokens[1])?;
                let l = parse_index(line, tokens[2], "hidden value", size(party))?;
                let x = tokens[3]
                    .parse::<usize>()
                    .map_err(|_| syntax(line, format!("`{}` is not a setting index", tokens[3])))?;
                if responses[party as usize]
                    .insert((l, x), numbers(line, &tokens[4..])?)
                    .is_some()
                {
                    return Err(FormatError::Duplicate {
                        line,
                        what: format!("response {party} {l} {x}"),
                    });
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let Some((la, lb)) = alphabet else {
        return Err(syntax(last_line.max(1), "missing `alphabet` line"));
    };
    let mut w = vec![0.0; la * lb];
    for (&(i, j), &v) in &weights {
        w[i * lb + j] = v;
    }
    let mut sides = Vec::new();
    for (party, size) in [(Party::A, la), (Party::B, lb)] {
        let rows = &setdist[party as usize];
        let resp = &responses[party as usize];
        let missing = |what: &str| syntax(last_line, format!("missing {what}"));
        let dist: Vec<Vec<f64>> = (0..size)
            .map(|l| {
                rows.get(&l)
                    .cloned()
                    .ok_or_else(|| missing(&format!("setdist {party} {l}")))
            })
            .collect::<Result<_, _>>()?;
        let n = dist[0].len();
        let mut tables = Vec::with_capacity(size);
        for l in 0..size {
            let table: Vec<Vec<f64>> = (0..n)
                .map(|x| {
                    resp.get(&(l, x))
                        .cloned()
                        .ok_or_else(|| missing(&format!("response {party} {l} {x}")))
                })
                .collect::<Result<_, _>>()?;
            tables.push(StochasticMatrix::from_rows(&table)?);
        }
        if let Some(&(l, x)) = resp.keys().find(|&&(l, x)| l >= size || x >= n) {
            return Err(syntax(
                last_line,
                format!("response {party} {l} {x} has no setting {x}"),
            ));
        }
        sides.push((StochasticMatrix::from_rows(&dist)?, tables));
    }
    let (sb, rb) = sides.pop().expect("two sides");
    let (sa, ra) = sides.pop().expect("two sides");
    Ok(EveStrategy::new(w, sa, sb, ra, rb)?)
}

/// Writes a strategy in the format read by [`parse_strategy`]. Zero weights
/// are omitted.
pub fn serialize_strategy(e: &EveStrategy) -> String {
    let mut out = String::new();
    let (la, lb) = e.alphabet_sizes();
    let _ = writeln!(out, "alphabet A={la} B={lb}");
    for i in 0..la {
        for j in 0..lb {
            let v = e.weight(i, j);
            if v != 0.0 {
                let _ = writeln!(out, "weight {i} {j} {v}");
            }
        }
    }
    for party in [Party::A, Party::B] {
        for (l, row) in e.settings(party).iter_rows().enumerate() {
            let _ = write!(out, "setdist {party} {l}");
            for p in row {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        for (l, table) in e.responses(party).iter().enumerate() {
            for (x, row) in table.iter_rows().enumerate() {
                let _ = write!(out, "response {party} {l} {x}");
                for p in row {
                    let _ = write!(out, " {p}");
                }
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use bell_asym_core::builtin_game;

    #[test]
    fn empty_table() {
        let g = parse_game("settings A=2 B=2\noutcomes A=2 B=2\n").unwrap();
        assert!(g.coefficients().iter().all(|&v| v == 0.0));
        assert_eq!(g.marginal_a(), &[0.5, 0.5]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text =
            "# a game\n\nsettings A=1 B=2   # trailing\noutcomes A=2 B=1\ncoeff 0 1 1 0 -1.5\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.coeff(0, 1, 1, 0), -1.5);
        assert_eq!(g.coeff(0, 0, 0, 0), 0.0);
    }

    #[test]
    fn builtins_round_trip() {
        for name in bell_asym_core::BUILTIN_GAMES {
            let g = builtin_game(name).unwrap();
            assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
        }
    }

    #[test]
    fn serialization_is_sorted() {
        let text = serialize_game(&builtin_game("i3322").unwrap());
        let keys: Vec<Vec<usize>> = text
            .lines()
            .filter(|l| l.starts_with("coeff"))
            .map(|l| {
                l.split_whitespace()
                    .skip(1)
                    .take(4)
                    .map(|t| t.parse().unwrap())
                    .collect()
            })
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("coeff 0 0 1 1 2\n"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = |t: &str| parse_game(t).unwrap_err();
        assert_eq!(
            err("settings A=2 B=2\noutcomes A=2 B=2\ncoeff 0 0 0\n"),
            syntax(3, "expected `coeff <x> <a> <y> <b> <value>`")
        );
        assert!(matches!(
            err("settings A=2 B=2\noutcomes A=2 B=2\n\ncoeff 0 0 2 0 1\n"),
            FormatError::Range {
                line: 4,
                what: "y",
                index: 2,
                bound: 2
            }
        ));
        assert!(matches!(
            err("settings A=2 B=2\noutcomes A=2 B=2\ncoeff 0 0 0 0 1\ncoeff 0 0 0 0 2\n"),
            FormatError::Duplicate { line: 4, .. }
        ));
        assert!(matches!(
            err("outcomes A=2 B=2\n"),
            FormatError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            err("settings A=2 B=2\nfoo\n"),
            FormatError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            err("settings A=0 B=2\n"),
            FormatError::Syntax { line: 1, .. }
        ));
        assert!(matches!(err(""), FormatError::Syntax { .. }));
        assert!(matches!(
            err("settings A=2 B=2\noutcomes A=2 B=2\ncoeff 0 0 0 0 nan\n"),
            FormatError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn marginals() {
        let g = parse_game("settings A=2 B=1\noutcomes A=2 B=2\nmarginal A 0.25 0.75\n").unwrap();
        assert_eq!(g.marginal_a(), &[0.25, 0.75]);
        assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
        let bad = parse_game("settings A=2 B=1\noutcomes A=2 B=2\nmarginal A 0.5 0.6\n");
        assert!(matches!(bad, Err(FormatError::Invalid(_))));
        let short = parse_game("settings A=2 B=1\noutcomes A=2 B=2\nmarginal A 1\n");
        assert!(matches!(short, Err(FormatError::Syntax { line: 3, .. })));
    }

    #[test]
    fn strategy_round_trip() {
        let g = builtin_game("chsh").unwrap();
        let s = bell_asym_core::classical_bound(&g, 1 << 20)
            .unwrap()
            .strategy;
        let e = EveStrategy::from_deterministic(&g, &s).unwrap();
        let text = serialize_strategy(&e);
        assert_eq!(parse_strategy(&text).unwrap(), e);
    }

    #[test]
    fn strategy_errors() {
        assert!(matches!(
            parse_strategy("weight 0 0 1\n"),
            Err(FormatError::Syntax { line: 1, .. })
        ));
        let missing =
            "alphabet A=1 B=1\nweight 0 0 1\nsetdist A 0 1\nsetdist B 0 1\nresponse A 0 0 1\n";
        assert!(matches!(
            parse_strategy(missing),
            Err(FormatError::Syntax { .. })
        ));
        let range = "alphabet A=1 B=1\nweight 0 1 1\n";
        assert!(matches!(
            parse_strategy(range),
            Err(FormatError::Range { line: 2, .. })
        ));
    }
}

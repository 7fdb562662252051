use super::{DetectorErrorModel, DetectorInfo, Mechanism};
use crate::{Error, Result};

#[derive(Debug)]
enum Target {
    Detector(u64),
    Observable(u64),
    Separator,
    Integer(u64),
}

#[derive(Debug)]
enum Instr {
    Error {
        line: usize,
        probability: f64,
        targets: Vec<Target>,
    },
    Detector {
        coords: Vec<f64>,
        targets: Vec<Target>,
    },
    Observable {
        targets: Vec<Target>,
    },
    Shift {
        coords: Vec<f64>,
        amount: u64,
    },
    Repeat {
        count: u64,
        body: Vec<Instr>,
    },
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

enum TokenKind {
    Open,
    Close,
    Target,
    Head,
}

impl Token<'_> {
    fn kind(&self) -> TokenKind {
        let t = self.text;
        let b = t.as_bytes();
        if t == "{" {
            TokenKind::Open
        } else if t == "}" {
            TokenKind::Close
        } else if t == "^"
            || b[0].is_ascii_digit()
            || (matches!(b[0], b'D' | b'd' | b'L' | b'l') && b.len() > 1 && b[1..].iter().all(u8::is_ascii_digit))
        {
            TokenKind::Target
        } else {
            TokenKind::Head
        }
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits text into tokens. Comments run to end of line, braces are tokens
/// of their own, and a parenthesised argument list stays attached to its
/// instruction name even when it contains spaces.
fn tokenize(text: &str) -> Result<Vec<Token<'_>>> {
    let mut tokens = Vec::new();
    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c == b'{' || c == b'}' {
                tokens.push(Token {
                    text: &line[i..i + 1],
                    line: line_no,
                    column: i + 1,
                });
                i += 1;
                continue;
            }
            let start = i;
            let mut depth = 0usize;
            while i < bytes.len() {
                match bytes[i] {
                    b'(' => depth += 1,
                    b')' => {
                        if depth == 0 {
                            return Err(syntax(line_no, i + 1, "unbalanced ')'"));
                        }
                        depth -= 1;
                    }
                    b'{' | b'}' if depth == 0 => break,
                    c if c.is_ascii_whitespace() && depth == 0 => break,
                    _ => {}
                }
                i += 1;
            }
            if depth != 0 {
                return Err(syntax(line_no, start + 1, "unterminated argument list"));
            }
            tokens.push(Token {
                text: &line[start..i],
                line: line_no,
                column: start + 1,
            });
        }
    }
    Ok(tokens)
}

fn parse_args(tok: &Token<'_>) -> Result<(String, Vec<f64>)> {
    let line = tok.line;
    let Some(open) = tok.text.find('(') else {
        return Ok((tok.text.to_ascii_lowercase(), Vec::new()));
    };
    if !tok.text.ends_with(')') {
        return Err(syntax(line, tok.column + open, "expected ')' to close arguments"));
    }
    let name = tok.text[..open].to_ascii_lowercase();
    let inner = &tok.text[open + 1..tok.text.len() - 1];
    let mut args = Vec::new();
    if !inner.trim().is_empty() {
        let mut offset = open + 1;
        for piece in inner.split(',') {
            let value: f64 = piece.trim().parse().map_err(|_| {
                syntax(line, tok.column + offset, format!("invalid number '{}'", piece.trim()))
            })?;
            args.push(value);
            offset += piece.len() + 1;
        }
    }
    Ok((name, args))
}

fn parse_target(tok: &Token<'_>) -> Result<Target> {
    let t = tok.text;
    if t == "^" {
        return Ok(Target::Separator);
    }
    let bad = || syntax(tok.line, tok.column, format!("invalid target '{t}'"));
    match t.as_bytes()[0] {
        b'D' | b'd' => t[1..].parse().map(Target::Detector).map_err(|_| bad()),
        b'L' | b'l' => t[1..].parse().map(Target::Observable).map_err(|_| bad()),
        b'0'..=b'9' => t.parse().map(Target::Integer).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn targets(&mut self) -> Result<Vec<(Target, usize)>> {
        let mut out = Vec::new();
        while let Some(tok) = self.tokens.get(self.pos) {
            if !matches!(tok.kind(), TokenKind::Target) {
                break;
            }
            out.push((parse_target(tok)?, self.pos));
            self.pos += 1;
        }
        Ok(out)
    }

    fn block(&mut self, opened_at: Option<(usize, usize)>) -> Result<Vec<Instr>> {
        let mut out = Vec::new();
        while self.pos < self.tokens.len() {
            let head_idx = self.pos;
            let (line, column) = (self.tokens[head_idx].line, self.tokens[head_idx].column);
            match self.tokens[head_idx].kind() {
                TokenKind::Close => {
                    self.pos += 1;
                    return match opened_at {
                        Some(_) => Ok(out),
                        None => Err(syntax(line, column, "unmatched '}'")),
                    };
                }
                TokenKind::Open => return Err(syntax(line, column, "unexpected '{'")),
                TokenKind::Target => {
                    let text = self.tokens[head_idx].text;
                    return Err(syntax(line, column, format!("expected instruction, found '{text}'")));
                }
                TokenKind::Head => {}
            }
            let (name, args) = parse_args(&self.tokens[head_idx])?;
            self.pos += 1;
            let targets = self.targets()?;
            let col_of = |p: &Self, idx: usize| p.tokens[idx].column;
            match name.as_str() {
                "repeat" => {
                    let count = match targets.as_slice() {
                        [(Target::Integer(n), _)] if args.is_empty() => *n,
                        _ => return Err(syntax(line, column, "expected 'repeat <count> {'")),
                    };
                    match self.tokens.get(self.pos) {
                        Some(tok) if matches!(tok.kind(), TokenKind::Open) => self.pos += 1,
                        _ => return Err(syntax(line, column, "expected '{' after repeat count")),
                    }
                    let body = self.block(Some((line, column)))?;
                    out.push(Instr::Repeat { count, body });
                }
                "error" => {
                    if args.len() != 1 {
                        return Err(syntax(line, column, "error takes exactly one probability"));
                    }
                    if let Some((_, idx)) = targets.iter().find(|(t, _)| matches!(t, Target::Integer(_))) {
                        return Err(syntax(line, col_of(self, *idx), "error targets must be D# or L#"));
                    }
                    out.push(Instr::Error {
                        line,
                        probability: args[0],
                        targets: targets.into_iter().map(|(t, _)| t).collect(),
                    });
                }
                "detector" => {
                    if let Some((_, idx)) = targets.iter().find(|(t, _)| !matches!(t, Target::Detector(_))) {
                        return Err(syntax(line, col_of(self, *idx), "detector targets must be D#"));
                    }
                    out.push(Instr::Detector {
                        coords: args,
                        targets: targets.into_iter().map(|(t, _)| t).collect(),
                    });
                }
                "logical_observable" => {
                    if let Some((_, idx)) = targets.iter().find(|(t, _)| !matches!(t, Target::Observable(_))) {
                        return Err(syntax(line, col_of(self, *idx), "logical_observable targets must be L#"));
                    }
                    out.push(Instr::Observable {
                        targets: targets.into_iter().map(|(t, _)| t).collect(),
                    });
                }
                "shift_detectors" => {
                    let amount = match targets.as_slice() {
                        [] => 0,
                        [(Target::Integer(n), _)] => *n,
                        [(_, idx), ..] => {
                            return Err(syntax(line, col_of(self, *idx), "shift_detectors takes one integer"))
                        }
                    };
                    out.push(Instr::Shift { coords: args, amount });
                }
                other => {
                    return Err(syntax(line, column, format!("unknown instruction '{other}'")));
                }
            }
        }
        match opened_at {
            Some((line, column)) => Err(syntax(line, column, "repeat block is never closed")),
            None => Ok(out),
        }
    }
}

struct Flattener {
    det_offset: u64,
    coord_offset: Vec<f64>,
    mechanisms: Vec<Mechanism>,
    coords: Vec<(u64, Vec<f64>)>,
    max_detector: Option<u64>,
    max_observable: Option<u64>,
}

impl Flattener {
    fn touch_detector(&mut self, d: u64) {
        self.max_detector = Some(self.max_detector.map_or(d, |m| m.max(d)));
    }

    fn touch_observable(&mut self, o: u64) {
        self.max_observable = Some(self.max_observable.map_or(o, |m| m.max(o)));
    }

    fn run(&mut self, instrs: &[Instr]) -> Result<()> {
        for instr in instrs {
            match instr {
                Instr::Error {
                    line,
                    probability,
                    targets,
                } => {
                    let p = *probability;
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::Probability {
                            line: *line,
                            probability: p,
                        });
                    }
                    let mut dets = Vec::new();
                    let mut obs = Vec::new();
                    for t in targets {
                        match t {
                            Target::Detector(d) => {
                                let d = d + self.det_offset;
                                self.touch_detector(d);
                                dets.push(index_u32(*line, d)?);
                            }
                            Target::Observable(o) => {
                                self.touch_observable(*o);
                                obs.push(index_u32(*line, *o)?);
                            }
                            Target::Separator | Target::Integer(_) => {}
                        }
                    }
                    let m = Mechanism::from_targets(p, &dets, &obs);
                    if m.detectors.is_empty() {
                        if m.observables.is_empty() {
                            continue;
                        }
                        return Err(Error::Undetectable {
                            line: *line,
                            observables: m.observables,
                        });
                    }
                    if p >= 0.5 {
                        log::warn!("line {line}: mechanism probability {p} >= 0.5");
                    }
                    self.mechanisms.push(m);
                }
                Instr::Detector { coords, targets } => {
                    for t in targets {
                        if let Target::Detector(d) = t {
                            let d = d + self.det_offset;
                            self.touch_detector(d);
                            let shifted = coords
                                .iter()
                                .enumerate()
                                .map(|(i, c)| c + self.coord_offset.get(i).copied().unwrap_or(0.0))
                                .collect();
                            self.coords.push((d, shifted));
                        }
                    }
                }
                Instr::Observable { targets } => {
                    for t in targets {
                        if let Target::Observable(o) = t {
                            self.touch_observable(*o);
                        }
                    }
                }
                Instr::Shift { coords, amount } => {
                    if self.coord_offset.len() < coords.len() {
                        self.coord_offset.resize(coords.len(), 0.0);
                    }
                    for (o, c) in self.coord_offset.iter_mut().zip(coords) {
                        *o += c;
                    }
                    self.det_offset += amount;
                }
                Instr::Repeat { count, body } => {
                    for _ in 0..*count {
                        self.run(body)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn index_u32(line: usize, value: u64) -> Result<u32> {
    u32::try_from(value).map_err(|_| syntax(line, 1, format!("index {value} out of range")))
}

/// Parses detector-error-model text into a flattened model.
///
/// Repeat blocks are unrolled, detector shifts applied and coordinates
/// offset. Rounds are inferred from the last coordinate when every detector
/// declares coordinates.
pub fn parse_dem(text: &str) -> Result<DetectorErrorModel> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let program = parser.block(None)?;
    let mut flat = Flattener {
        det_offset: 0,
        coord_offset: Vec::new(),
        mechanisms: Vec::new(),
        coords: Vec::new(),
        max_detector: None,
        max_observable: None,
    };
    flat.run(&program)?;

    let num_detectors = flat.max_detector.map_or(0, |d| d as usize + 1);
    let num_observables = flat.max_observable.map_or(0, |o| o as usize + 1);
    let mut dem = DetectorErrorModel::new(num_detectors, num_observables);
    dem.mechanisms = flat.mechanisms;
    for (d, coords) in flat.coords {
        dem.detectors[d as usize] = DetectorInfo {
            index: d as u32,
            coords: Some(coords),
            round: None,
        };
    }
    dem.infer_rounds_from_coords();
    Ok(dem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_error_line() {
        let dem = parse_dem("error(0.125) D0 D1 L0").unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
        let m = &dem.mechanisms[0];
        assert_eq!(m.probability, 0.125);
        assert_eq!(m.detectors, vec![0, 1]);
        assert_eq!(m.observables, vec![0]);
        assert_eq!(dem.num_detectors, 2);
        assert_eq!(dem.num_observables, 1);
    }

    #[test]
    fn repeat_unrolls_with_shift() {
        let dem = parse_dem("repeat 2 { error(0.1) D0 shift_detectors 1 }").unwrap();
        assert_eq!(dem.mechanisms.len(), 2);
        assert_eq!(dem.mechanisms[0].detectors, vec![0]);
        assert_eq!(dem.mechanisms[1].detectors, vec![1]);
        assert_eq!(dem.mechanisms[1].probability, 0.1);
        assert_eq!(dem.num_detectors, 2);

        let multi = parse_dem("repeat 2 {\n error(0.1) D0\n shift_detectors 1\n}\n").unwrap();
        assert_eq!(multi, dem);
    }

    #[test]
    fn coordinate_shift_and_round_inference() {
        let text = "\
detector(0, 0) D0
detector(1, 0) D1
repeat 2 {
    shift_detectors(0, 1) 2
    detector(0, 0) D0
    detector(1, 0) D1
}
error(0.01) D0 D1
";
        let dem = parse_dem(text).unwrap();
        assert_eq!(dem.num_detectors, 6);
        assert_eq!(dem.rounds, Some(3));
        assert_eq!(dem.detectors[5].coords, Some(vec![1.0, 2.0]));
        assert_eq!(dem.detectors[5].round, Some(2));
        assert_eq!(dem.detectors[2].round, Some(1));
        // shifts persist after the block
        assert_eq!(dem.mechanisms[0].detectors, vec![4, 5]);
    }

    #[test]
    fn missing_coords_leave_rounds_unset() {
        let dem = parse_dem("detector(0, 0) D0\nerror(0.1) D0 D1\n").unwrap();
        assert_eq!(dem.rounds, None);
        assert!(dem.detectors.iter().all(|d| d.round.is_none()));
    }

    #[test]
    fn comments_and_observable_declarations() {
        let dem = parse_dem("# header\nlogical_observable L3 # trailing\n\nerror(0.2) D4 # x\n").unwrap();
        assert_eq!(dem.num_observables, 4);
        assert_eq!(dem.num_detectors, 5);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_dem("error(0.1) D0\nerror(0.1) X3\n") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!((line, column), (2, 12));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_dem("bogus D0"),
            Err(Error::Syntax { line: 1, column: 1, .. })
        ));
        assert!(matches!(parse_dem("repeat 2 {\nerror(0.1) D0\n"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_dem("}\n"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_dem("error(0.1, 0.2) D0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_dem("error(abc) D0"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn probability_out_of_range() {
        assert!(matches!(parse_dem("error(1.5) D0"), Err(Error::Probability { line: 1, .. })));
        assert!(matches!(parse_dem("error(0) D0"), Err(Error::Probability { .. })));
    }

    #[test]
    fn undetectable_channel_is_rejected() {
        assert!(matches!(
            parse_dem("error(0.1) D0\nerror(0.1) L0\n"),
            Err(Error::Undetectable { line: 2, .. })
        ));
        // empty-empty mechanisms are dropped
        let dem = parse_dem("error(0.1) D0 D0\nerror(0.2) D1\n").unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
    }

    #[test]
    fn separators_xor_components() {
        let dem = parse_dem("error(0.1) D0 D1 ^ D1 D2 L0").unwrap();
        assert_eq!(dem.mechanisms[0].detectors, vec![0, 2]);
    }
}

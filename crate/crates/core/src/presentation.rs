//! Group presentations over number fields and the text format they are read from.
//!
//! ```text
//! # comment
//! minpoly: x^2 + 1
//! embedding: 0            (optional root index for the identity embedding)
//! T = [[1,1],[0,1]]       (label optional)
//! [[1,x],[0,1]]
//! circle: 1 0 -2 norm2    (A B C, optional label)
//! ```

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::moebius::{CMat, Moebius};
use crate::numberfield::{FieldElement, NumberField};
use crate::poly::QPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresentationError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `minpoly:` header")]
    MissingHeader,
    #[error("no generators given")]
    Empty,
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Mat = Moebius<FieldElement>;

/// Generators (and optional catalogued circles) over a common number field.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub field: NumberField,
    pub generators: Vec<Mat>,
    pub labels: Vec<String>,
    pub circles: Vec<CircleSpec>,
}

/// Hermitian coefficients `(A, B, C)` of `A|z|^2 + B conj(z) + conj(B) z + C = 0`.
#[derive(Clone, Debug)]
pub struct CircleSpec {
    pub label: String,
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
}

impl GroupPresentation {
    pub fn new(field: NumberField, generators: Vec<Mat>) -> Result<Self, PresentationError> {
        if generators.is_empty() {
            return Err(PresentationError::Empty);
        }
        let labels = (0..generators.len()).map(|i| format!("g{i}")).collect();
        Ok(GroupPresentation {
            field,
            generators,
            labels,
            circles: Vec::new(),
        })
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Float image of an exact matrix under the identity embedding, det 1.
    pub fn embed(&self, m: &Mat) -> CMat {
        let id = self.field.identity_embedding();
        m.map(|x| id.apply(x)).normalized()
    }

    pub fn load(path: &Path) -> Result<Self, PresentationError> {
        let text = std::fs::read_to_string(path).map_err(|e| PresentationError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        parse_presentation(&text)
    }
}

/// Build a matrix from four expressions in `x`.
pub fn mat(field: &NumberField, e: [&str; 4]) -> Mat {
    let p = |s: &str| field.parse_element(s).expect("valid literal");
    Moebius::from_entries(p(e[0]), p(e[1]), p(e[2]), p(e[3]))
}

pub fn parse_presentation(text: &str) -> Result<GroupPresentation, PresentationError> {
    let mut field: Option<NumberField> = None;
    let mut embedding: Option<(usize, usize)> = None;
    let mut gens: Vec<(usize, String, String)> = Vec::new();
    let mut circles: Vec<(usize, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |msg: String| PresentationError::Syntax { line: line_no, msg };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("minpoly:") {
            let p = parse_poly_expr(rest).map_err(err)?;
            let f = NumberField::new(p).map_err(|e| PresentationError::Syntax {
                line: line_no,
                msg: e.to_string(),
            })?;
            field = Some(f);
        } else if let Some(rest) = line.strip_prefix("embedding:") {
            let idx = rest
                .trim()
                .parse::<usize>()
                .map_err(|e| err(format!("bad embedding index: {e}")))?;
            embedding = Some((line_no, idx));
        } else if let Some(rest) = line.strip_prefix("circle:") {
            circles.push((line_no, rest.trim().to_string()));
        } else {
            let (label, body) = match line.split_once('=') {
                Some((l, b)) if !l.contains('[') => (l.trim().to_string(), b.trim().to_string()),
                _ => (format!("g{}", gens.len()), line.to_string()),
            };
            gens.push((line_no, label, body));
        }
    }
    let mut field = field.ok_or(PresentationError::MissingHeader)?;
    if let Some((line, idx)) = embedding {
        if idx >= field.degree() {
            return Err(PresentationError::Syntax {
                line,
                msg: format!("embedding index {idx} out of range for degree {}", field.degree()),
            });
        }
        field = field.with_default_root(idx);
    }
    if gens.is_empty() {
        return Err(PresentationError::Empty);
    }
    let mut generators = Vec::new();
    let mut labels = Vec::new();
    for (line, label, body) in gens {
        let err = |msg: String| PresentationError::Syntax { line, msg };
        let e = parse_matrix_entries(&body).map_err(err)?;
        let el: Vec<FieldElement> = e
            .iter()
            .map(|s| field.parse_element(s).map_err(|x| err(x.to_string())))
            .collect::<Result<_, _>>()?;
        let m = Moebius::from_entries(el[0].clone(), el[1].clone(), el[2].clone(), el[3].clone());
        if m.det().is_zero() {
            return Err(err("singular generator".into()));
        }
        generators.push(m);
        labels.push(label);
    }
    let mut cs = Vec::new();
    for (line, body) in circles {
        let err = |msg: String| PresentationError::Syntax { line, msg };
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 3 && toks.len() != 4 {
            return Err(err("expected `circle: A B C [label]`".into()));
        }
        let p = |s: &str| field.parse_element(s).map_err(|x| err(x.to_string()));
        cs.push(CircleSpec {
            a: p(toks[0])?,
            b: p(toks[1])?,
            c: p(toks[2])?,
            label: toks
                .get(3)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("circle{}", cs.len())),
        });
    }
    Ok(GroupPresentation {
        field,
        generators,
        labels,
        circles: cs,
    })
}

fn parse_matrix_entries(s: &str) -> Result<Vec<String>, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix("[[")
        .and_then(|r| r.strip_suffix("]]"))
        .ok_or_else(|| format!("expected [[a,b],[c,d]], got `{s}`"))?;
    let rows: Vec<&str> = inner.split("],[").collect();
    if rows.len() != 2 {
        return Err("matrix must have two rows".into());
    }
    let mut out = Vec::new();
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        if cols.len() != 2 || cols.iter().any(|c| c.is_empty()) {
            return Err("each row must have two entries".into());
        }
        out.extend(cols.into_iter().map(String::from));
    }
    Ok(out)
}

/// Parse a polynomial in `x` with rational coefficients, e.g. `3/2*x^2 - x + 1`.
pub fn parse_poly_expr(s: &str) -> Result<QPoly, String> {
    let toks = tokenize(s)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("unexpected token {:?}", p.toks[p.pos]));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    X,
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Tok::Num(digits.parse().unwrap()));
        } else if ch == 'x' {
            out.push(Tok::X);
            i += 1;
        } else if "+-*/^()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(format!("unexpected character `{ch}`"));
        }
    }
    if out.is_empty() {
        return Err("empty expression".into());
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<QPoly, String> {
        let mut neg = false;
        if let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            neg = *c == '-';
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(&-BigRational::one());
        }
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<QPoly, String> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let d = self.power()?;
                    if d.degree() != Some(0) {
                        return Err("division only by nonzero constants".into());
                    }
                    acc = acc.scale(&(BigRational::one() / d.coeff(0)));
                }
                Some(Tok::Num(_)) | Some(Tok::X) | Some(Tok::Op('(')) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<QPoly, String> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let e = match self.peek() {
                Some(Tok::Num(n)) => n.clone(),
                _ => return Err("exponent must be a nonnegative integer".into()),
            };
            self.pos += 1;
            let e: u32 = e.try_into().map_err(|_| "exponent too large".to_string())?;
            if e > 64 {
                return Err("exponent too large".into());
            }
            let mut acc = QPoly::one();
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<QPoly, String> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(QPoly::constant(BigRational::from_integer(n)))
            }
            Some(Tok::X) => {
                self.pos += 1;
                Ok(QPoly::x())
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

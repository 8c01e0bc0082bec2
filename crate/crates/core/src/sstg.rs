//! The SSTG text format: one statement per line, `#` starts a comment.
//!
//! ```text
//! sstg 1
//! assoc causation signals is-signalled-by
//! agent A color=red
//! agent B
//! promise A +vector:pi1:{Fri,Wed} B scope=A,B cond=pi0
//! adjacency A B dir=R
//! basis rank=1 origin=A set A-B
//! ```
//!
//! `adjacency` expands to the four promises of a binding. Agents must be
//! declared before use. [`serialize`] writes the header, associations,
//! agents in canonical order, then promises in insertion order, so
//! `parse(serialize(w)) == w`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::coordinates::{Edge, MatroidBasis};
use crate::model::{
    AgentId, AssociationClass, AssociationType, Attributes, BodyKind, ModelError, Polarity,
    Promise, PromiseBody, World,
};

pub const HEADER: &str = "sstg 1";
/// Direction used by `adjacency` lines that name none.
pub const DEFAULT_DIRECTION: &str = "u";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SstgError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown agent {id}")]
    UnknownAgent {
        line: usize,
        column: usize,
        id: String,
    },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SstgDocument {
    pub world: World,
    pub bases: Vec<MatroidBasis>,
}

struct Tok<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (i, c)) in code.char_indices().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some((i, col + 1)),
            (true, Some((s, column))) => {
                out.push(Tok {
                    column,
                    text: &code[s..i],
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, column)) = start {
        out.push(Tok {
            column,
            text: &code[s..],
        });
    }
    out
}

struct LineCtx {
    line: usize,
    end_column: usize,
}

impl LineCtx {
    fn syntax(&self, column: usize, message: impl Into<String>) -> SstgError {
        SstgError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn model(&self, source: ModelError) -> SstgError {
        SstgError::Model {
            line: self.line,
            source,
        }
    }

    fn agent(&self, w: &World, tok: &Tok<'_>, text: &str) -> Result<AgentId, SstgError> {
        let id = AgentId::new(text)
            .map_err(|_| self.syntax(tok.column, format!("invalid agent id {text:?}")))?;
        if !w.contains_agent(&id) {
            return Err(SstgError::UnknownAgent {
                line: self.line,
                column: tok.column,
                id: text.to_string(),
            });
        }
        Ok(id)
    }

    fn expect<'a, 't>(
        &self,
        toks: &'t [Tok<'a>],
        i: usize,
        what: &str,
    ) -> Result<&'t Tok<'a>, SstgError> {
        toks.get(i)
            .ok_or_else(|| self.syntax(self.end_column, format!("expected {what}")))
    }
}

pub fn parse_sstg(text: &str) -> Result<World, SstgError> {
    parse_document(text).map(|d| d.world)
}

pub fn parse_document(text: &str) -> Result<SstgDocument, SstgError> {
    let mut doc = SstgDocument::default();
    let mut seen_header = false;
    for (n, raw) in text.lines().enumerate() {
        let toks = tokenize(raw);
        let ctx = LineCtx {
            line: n + 1,
            end_column: raw.split('#').next().unwrap_or("").chars().count() + 1,
        };
        let Some(head) = toks.first() else { continue };
        if !seen_header {
            if head.text != "sstg" {
                return Err(ctx.syntax(head.column, "expected header `sstg 1`"));
            }
            match toks.get(1) {
                Some(v) if v.text == "1" && toks.len() == 2 => {}
                Some(v) => {
                    return Err(ctx.syntax(v.column, format!("unsupported version {:?}", v.text)))
                }
                None => return Err(ctx.syntax(ctx.end_column, "missing version")),
            }
            seen_header = true;
            continue;
        }
        match head.text {
            "agent" => parse_agent(&ctx, &toks, &mut doc.world)?,
            "promise" => parse_promise(&ctx, &toks, &mut doc.world)?,
            "adjacency" => parse_adjacency(&ctx, &toks, &mut doc.world)?,
            "assoc" => parse_assoc(&ctx, &toks, &mut doc.world)?,
            "basis" => {
                let b = parse_basis_line(&ctx, raw, &toks, &doc.world)?;
                doc.bases.push(b);
            }
            "sstg" => return Err(ctx.syntax(head.column, "duplicate header")),
            other => return Err(ctx.syntax(head.column, format!("unknown statement {other:?}"))),
        }
    }
    if !seen_header {
        return Err(SstgError::Syntax {
            line: 1,
            column: 1,
            message: "missing header `sstg 1`".into(),
        });
    }
    Ok(doc)
}

/// Reads `basis` lines against an existing world. Blank lines, comments
/// and an optional header are allowed; anything else is an error.
pub fn parse_bases(text: &str, w: &World) -> Result<Vec<MatroidBasis>, SstgError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let toks = tokenize(raw);
        let ctx = LineCtx {
            line: n + 1,
            end_column: raw.split('#').next().unwrap_or("").chars().count() + 1,
        };
        match toks.first().map(|t| t.text) {
            None => {}
            Some("sstg") if toks.len() == 2 && toks[1].text == "1" => {}
            Some("basis") => out.push(parse_basis_line(&ctx, raw, &toks, w)?),
            Some(_) => return Err(ctx.syntax(toks[0].column, "expected a basis statement")),
        }
    }
    Ok(out)
}

fn parse_agent(ctx: &LineCtx, toks: &[Tok<'_>], w: &mut World) -> Result<(), SstgError> {
    let id_tok = ctx.expect(toks, 1, "agent id")?;
    let id = AgentId::new(id_tok.text)
        .map_err(|_| ctx.syntax(id_tok.column, format!("invalid agent id {:?}", id_tok.text)))?;
    let mut attrs = Attributes::new();
    for t in &toks[2..] {
        let (k, v) = t.text.split_once('=').ok_or_else(|| {
            ctx.syntax(t.column, format!("expected key=value, found {:?}", t.text))
        })?;
        if attrs.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ctx.syntax(t.column, format!("attribute {k:?} repeated")));
        }
    }
    w.insert_agent(id, attrs).map_err(|e| ctx.model(e))
}

fn parse_body(ctx: &LineCtx, tok: &Tok<'_>) -> Result<(Polarity, PromiseBody), SstgError> {
    let mut chars = tok.text.chars();
    let polarity = match chars.next() {
        Some('+') => Polarity::Plus,
        Some('-') => Polarity::Minus,
        _ => {
            return Err(ctx.syntax(
                tok.column,
                format!("expected + or - polarity in {:?}", tok.text),
            ))
        }
    };
    let rest = chars.as_str();
    let mut parts = rest.splitn(3, ':');
    let kind = match parts.next() {
        Some("scalar") => BodyKind::Scalar,
        Some("vector") => BodyKind::Vector,
        _ => {
            return Err(ctx.syntax(
                tok.column + 1,
                format!("expected scalar or vector in {:?}", tok.text),
            ))
        }
    };
    let label = parts
        .next()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| ctx.syntax(tok.column, format!("missing label in {:?}", tok.text)))?;
    let mut body = match kind {
        BodyKind::Scalar => PromiseBody::scalar(label),
        BodyKind::Vector => PromiseBody::vector(label),
    };
    if let Some(payload) = parts.next() {
        let inner = payload
            .strip_prefix('{')
            .and_then(|p| p.strip_suffix('}'))
            .ok_or_else(|| {
                ctx.syntax(
                    tok.column,
                    format!("payload must be {{a,b}} in {:?}", tok.text),
                )
            })?;
        body.payload = inner
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
    }
    Ok((polarity, body))
}

fn parse_promise(ctx: &LineCtx, toks: &[Tok<'_>], w: &mut World) -> Result<(), SstgError> {
    let from_tok = ctx.expect(toks, 1, "promiser")?;
    let body_tok = ctx.expect(toks, 2, "promise body")?;
    let to_tok = ctx.expect(toks, 3, "promisee")?;
    let from = ctx.agent(w, from_tok, from_tok.text)?;
    let (polarity, mut body) = parse_body(ctx, body_tok)?;
    let to = ctx.agent(w, to_tok, to_tok.text)?;
    let mut p = Promise::new(from, polarity, PromiseBody::scalar("_"), to);
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for t in &toks[4..] {
        let (k, v) = t
            .text
            .split_once('=')
            .ok_or_else(|| ctx.syntax(t.column, format!("expected option, found {:?}", t.text)))?;
        if !seen.insert(k) {
            return Err(ctx.syntax(t.column, format!("option {k:?} repeated")));
        }
        match k {
            "dir" => body.direction = Some(v.to_string()),
            "cond" => p.condition = Some(v.to_string()),
            "scope" => {
                let mut scope = BTreeSet::new();
                for id in v.split(',') {
                    scope.insert(ctx.agent(w, t, id)?);
                }
                p.scope = scope;
            }
            other => return Err(ctx.syntax(t.column, format!("unknown option {other:?}"))),
        }
    }
    p.body = body;
    w.insert_promise(p).map_err(|e| ctx.model(e))
}

fn parse_adjacency(ctx: &LineCtx, toks: &[Tok<'_>], w: &mut World) -> Result<(), SstgError> {
    let a_tok = ctx.expect(toks, 1, "agent")?;
    let b_tok = ctx.expect(toks, 2, "agent")?;
    let a = ctx.agent(w, a_tok, a_tok.text)?;
    let b = ctx.agent(w, b_tok, b_tok.text)?;
    let dir = match toks.get(3) {
        None => DEFAULT_DIRECTION,
        Some(t) => t
            .text
            .strip_prefix("dir=")
            .ok_or_else(|| ctx.syntax(t.column, format!("expected dir=<d>, found {:?}", t.text)))?,
    };
    if let Some(t) = toks.get(4) {
        return Err(ctx.syntax(t.column, "trailing input"));
    }
    w.insert_binding(&a, &b, dir).map_err(|e| ctx.model(e))
}

fn parse_assoc(ctx: &LineCtx, toks: &[Tok<'_>], w: &mut World) -> Result<(), SstgError> {
    let class_tok = ctx.expect(toks, 1, "association class")?;
    let class: AssociationClass = class_tok
        .text
        .parse()
        .map_err(|m: String| ctx.syntax(class_tok.column, m))?;
    let label = ctx.expect(toks, 2, "label")?.text;
    let inverse = ctx.expect(toks, 3, "inverse label")?.text;
    if let Some(t) = toks.get(4) {
        return Err(ctx.syntax(t.column, "trailing input"));
    }
    w.insert_association(AssociationType::new(class, label, inverse))
        .map_err(|e| ctx.model(e))
}

/// An edge token `a-b`, split at the one `-` that leaves two known agents.
fn parse_edge(ctx: &LineCtx, tok: &Tok<'_>, w: &World) -> Result<Edge, SstgError> {
    let text = tok.text;
    let splits: Vec<(AgentId, AgentId)> = text
        .match_indices('-')
        .filter_map(|(i, _)| {
            let a = AgentId::new(&text[..i]).ok()?;
            let b = AgentId::new(&text[i + 1..]).ok()?;
            (w.contains_agent(&a) && w.contains_agent(&b)).then_some((a, b))
        })
        .collect();
    match splits.len() {
        1 => {
            let (a, b) = splits.into_iter().next().expect("one split");
            Ok(Edge::new(a, b))
        }
        0 => Err(ctx.syntax(
            tok.column,
            format!("{text:?} does not name an edge between known agents"),
        )),
        _ => Err(ctx.syntax(tok.column, format!("edge {text:?} is ambiguous"))),
    }
}

fn parse_basis_line(
    ctx: &LineCtx,
    raw: &str,
    toks: &[Tok<'_>],
    w: &World,
) -> Result<MatroidBasis, SstgError> {
    let mut rank: Option<(usize, usize)> = None;
    let mut origin: Option<AgentId> = None;
    let mut i = 1;
    while let Some(t) = toks.get(i) {
        if let Some(v) = t.text.strip_prefix("rank=") {
            let r = v
                .parse()
                .map_err(|_| ctx.syntax(t.column, format!("bad rank {v:?}")))?;
            rank = Some((r, t.column));
        } else if let Some(v) = t.text.strip_prefix("origin=") {
            origin = Some(ctx.agent(w, t, v)?);
        } else {
            break;
        }
        i += 1;
    }
    let (rank, rank_col) =
        rank.ok_or_else(|| ctx.syntax(toks[0].column, "basis needs rank=<r>"))?;
    let origin = origin.ok_or_else(|| ctx.syntax(toks[0].column, "basis needs origin=<id>"))?;

    let mut sets: Vec<BTreeSet<Edge>> = Vec::new();
    let mut expect_set = true;
    for t in &toks[i..] {
        // `;` may stand alone or trail an edge.
        let (body, closes) = match t.text.strip_suffix(';') {
            Some(b) => (b, true),
            None => (t.text, false),
        };
        if !body.is_empty() {
            if expect_set {
                if body != "set" {
                    return Err(ctx.syntax(t.column, format!("expected `set`, found {body:?}")));
                }
                sets.push(BTreeSet::new());
                expect_set = false;
            } else {
                let edge_tok = Tok {
                    column: t.column,
                    text: body,
                };
                let e = parse_edge(ctx, &edge_tok, w)?;
                sets.last_mut().expect("a set is open").insert(e);
            }
        }
        if closes {
            if expect_set {
                return Err(ctx.syntax(t.column, "empty set"));
            }
            expect_set = true;
        }
    }
    if sets.is_empty() || sets.iter().any(BTreeSet::is_empty) {
        return Err(ctx.syntax(raw.chars().count().max(1), "basis needs non-empty sets"));
    }
    if sets.len() != rank {
        return Err(ctx.syntax(
            rank_col,
            format!("rank={rank} but {} sets given", sets.len()),
        ));
    }
    Ok(MatroidBasis::new(origin, sets))
}

pub fn serialize(w: &World) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").expect("string write");
    for t in w.associations() {
        writeln!(out, "assoc {} {} {}", t.class.name(), t.label, t.inverse).expect("string write");
    }
    for a in w.agents() {
        out.push_str("agent ");
        out.push_str(a.as_str());
        for (k, v) in w.attributes(a).into_iter().flatten() {
            write!(out, " {k}={v}").expect("string write");
        }
        out.push('\n');
    }
    for p in w.promises() {
        out.push_str(&promise_line(p));
        out.push('\n');
    }
    out
}

pub fn promise_line(p: &Promise) -> String {
    let mut s = format!(
        "promise {} {}{}:{}",
        p.promiser,
        p.polarity.symbol(),
        p.body.kind.name(),
        p.body.label
    );
    if !p.body.payload.is_empty() {
        let items: Vec<&str> = p.body.payload.iter().map(String::as_str).collect();
        write!(s, ":{{{}}}", items.join(",")).expect("string write");
    }
    write!(s, " {}", p.promisee).expect("string write");
    if let Some(d) = &p.body.direction {
        write!(s, " dir={d}").expect("string write");
    }
    if p.scope != p.default_scope() {
        let ids: Vec<&str> = p.scope.iter().map(AgentId::as_str).collect();
        write!(s, " scope={}", ids.join(",")).expect("string write");
    }
    if let Some(c) = &p.condition {
        write!(s, " cond={c}").expect("string write");
    }
    s
}

pub fn basis_line(b: &MatroidBasis) -> String {
    let sets: Vec<String> = b
        .sets
        .iter()
        .map(|s| {
            let edges: Vec<String> = s.iter().map(Edge::to_string).collect();
            format!("set {}", edges.join(" "))
        })
        .collect();
    format!(
        "basis rank={} origin={} {}",
        b.rank,
        b.origin,
        sets.join(" ; ")
    )
}

pub fn serialize_document(doc: &SstgDocument) -> String {
    let mut out = serialize(&doc.world);
    for b in &doc.bases {
        out.push_str(&basis_line(b));
        out.push('\n');
    }
    out
}

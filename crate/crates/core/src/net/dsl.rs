//! Line-oriented text format for data VASS and Petri nets with data.
//!
//! ```text
//! dvass demo
//! locations: l0 l1
//! registers: r1
//! plain: h1
//! atom: p1 p2
//! trans t: l0[r1=-] -> l1[r1=a] eff: +p1(b) -p2(a) +h1
//! source: l0[r1=-] plain{h1:2} tokens{p1:[a,a,b], p2:[a]}
//! target: l1[r1=a]
//! ```
//!
//! Within a transition line distinct variables denote distinct atoms, so a
//! line is exactly one orbit. Source and target share one variable scope.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::compile::{PetriNet, PetriTransition, Relation};
use super::{Configuration, Dvass, Instance, State, Transition, RESERVED_PREFIX};
use crate::atoms::Atom;
use crate::error::{Error, Result};
use crate::vector::DataVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Dvass(Instance),
    Petri(PetriNet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// The line denotes an orbit already given on an earlier line.
    DuplicateOrbit { line: usize, label: String },
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize) -> Self {
        Self { s, pos: 0, line }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, message: format!("{} (column {})", msg.into(), self.pos + 1) })
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() || c == ',' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, t: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.rest().chars().next() {
            if c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '@') || c == RESERVED_PREFIX {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(&self.s[start..self.pos])
    }

    fn number(&mut self) -> Option<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.rest().chars().next().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (start != self.pos).then(|| self.s[start..self.pos].parse().ok()).flatten()
    }
}

/// Variable names to atoms, allocated in order of first occurrence.
#[derive(Default)]
struct Vars {
    map: BTreeMap<String, Atom>,
}

impl Vars {
    fn atom(&mut self, name: &str) -> Atom {
        let n = self.map.len() as Atom;
        *self.map.entry(name.to_string()).or_insert(n)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn check_name(name: &str, line: usize, allow_reserved: bool) -> Result<()> {
    if !allow_reserved && name.starts_with(RESERVED_PREFIX) {
        return Err(Error::Parse {
            line,
            message: Error::ReservedName(name.to_string()).to_string(),
        });
    }
    Ok(())
}

fn lookup(names: &[String], name: &str, line: usize) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| Error::Parse {
        line,
        message: Error::Undeclared(name.to_string()).to_string(),
    })
}

/// Parses either format. Names with the reserved prefix are rejected.
pub fn parse(text: &str) -> Result<(Parsed, Vec<Warning>)> {
    parse_with(text, false)
}

/// Parses either format, optionally accepting generated names.
pub fn parse_with(text: &str, allow_reserved: bool) -> Result<(Parsed, Vec<Warning>)> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(Error::Parse { line: 1, message: "empty input".into() });
    };
    let mut c = Cursor::new(first, first_no);
    let kind = c.ident()?;
    let name = if c.at_end() { String::new() } else { c.ident()?.to_string() };
    match kind {
        "dvass" => parse_dvass(name, &lines[1..], allow_reserved),
        "petri" => parse_petri(name, &lines[1..], allow_reserved),
        _ => c.err("expected `dvass NAME` or `petri NAME`"),
    }
}

fn split_key(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    Some((k.trim(), v))
}

fn name_list(rest: &str, line: usize, allow_reserved: bool) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for n in rest.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
        check_name(n, line, allow_reserved)?;
        if out.iter().any(|m| m == n) {
            return Err(Error::Parse { line, message: format!("`{n}` listed twice") });
        }
        out.push(n.to_string());
    }
    Ok(out)
}

fn parse_dvass(
    name: String,
    lines: &[(usize, &str)],
    allow_reserved: bool,
) -> Result<(Parsed, Vec<Warning>)> {
    let mut net = Dvass::new(name, Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &(no, line) in lines {
        let Some((key, rest)) = split_key(line) else { continue };
        match key {
            "locations" => net.locations = name_list(rest, no, allow_reserved)?,
            "registers" => net.registers = name_list(rest, no, allow_reserved)?,
            "plain" => net.plain_places = name_list(rest, no, allow_reserved)?,
            "atom" => net.atom_places = name_list(rest, no, allow_reserved)?,
            _ => {}
        }
    }
    net.validate().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;

    let mut warnings = Vec::new();
    let mut source = None;
    let mut target = None;
    let mut scope = Vars::default();
    for &(no, line) in lines {
        let mut c = Cursor::new(line, no);
        let head = c.ident()?;
        match head {
            "locations" | "registers" | "plain" | "atom" => {}
            "trans" => {
                let label = c.ident()?.to_string();
                check_name(&label, no, allow_reserved)?;
                c.expect(':')?;
                let mut vars = Vars::default();
                let src = parse_state(&mut c, &net, &mut vars)?;
                if !c.eat_str("->") {
                    return c.err("expected `->`");
                }
                let tgt = parse_state(&mut c, &net, &mut vars)?;
                let mut effect = DataVector::zero();
                if c.eat_str("eff") {
                    c.expect(':')?;
                    while !c.at_end() {
                        parse_term(&mut c, &net, &mut vars, &mut effect)?;
                    }
                }
                if !c.at_end() {
                    return c.err("unexpected trailing text");
                }
                let t = Transition { source: src, effect, target: tgt };
                if !net.add_transition(label.clone(), t) {
                    warnings.push(Warning::DuplicateOrbit { line: no, label });
                }
            }
            "source" | "target" => {
                c.expect(':')?;
                let conf = parse_config_body(&mut c, &net, &mut scope)?;
                if head == "source" {
                    source = Some(conf);
                } else {
                    target = Some(conf);
                }
            }
            other => return c.err(format!("unknown directive `{other}`")),
        }
    }
    Ok((Parsed::Dvass(Instance { net, source, target }), warnings))
}

fn parse_state(c: &mut Cursor, net: &Dvass, vars: &mut Vars) -> Result<State> {
    let loc = c.ident()?;
    let location = lookup(&net.locations, loc, c.line)?;
    let mut registers = vec![None; net.registers.len()];
    if c.eat('[') {
        while !c.eat(']') {
            let r = c.ident()?;
            let ri = lookup(&net.registers, r, c.line)?;
            c.expect('=')?;
            registers[ri] = if c.eat('-') { None } else { Some(vars.atom(c.ident()?)) };
        }
    }
    Ok(State { location, registers })
}

fn parse_term(c: &mut Cursor, net: &Dvass, vars: &mut Vars, v: &mut DataVector) -> Result<()> {
    let sign = if c.eat('+') {
        1
    } else if c.eat('-') {
        -1
    } else {
        return c.err("expected `+` or `-`");
    };
    let k = sign * c.number().unwrap_or(1);
    let place = c.ident()?;
    if c.eat('(') {
        let p = lookup(&net.atom_places, place, c.line)?;
        let a = vars.atom(c.ident()?);
        c.expect(')')?;
        v.add_data(p, a, k);
    } else {
        let h = lookup(&net.plain_places, place, c.line)?;
        v.add_plain(h, k);
    }
    Ok(())
}

fn parse_config_body(c: &mut Cursor, net: &Dvass, vars: &mut Vars) -> Result<Configuration> {
    let state = parse_state(c, net, vars)?;
    let mut marking = DataVector::zero();
    while !c.at_end() {
        if c.eat_str("plain") {
            c.expect('{')?;
            while !c.eat('}') {
                let h = lookup(&net.plain_places, c.ident()?, c.line)?;
                c.expect(':')?;
                let Some(n) = c.number() else { return c.err("expected a count") };
                marking.add_plain(h, n);
            }
        } else if c.eat_str("tokens") {
            c.expect('{')?;
            while !c.eat('}') {
                let p = lookup(&net.atom_places, c.ident()?, c.line)?;
                c.expect(':')?;
                c.expect('[')?;
                while !c.eat(']') {
                    let a = vars.atom(c.ident()?);
                    marking.add_data(p, a, 1);
                }
            }
        } else {
            return c.err("expected `plain{...}` or `tokens{...}`");
        }
    }
    Ok(Configuration { state, marking })
}

/// Parses the body of a `source:` line against `net`, e.g.
/// `l0[r1=a] plain{h:1} tokens{p:[a,b]}`.
pub fn parse_configuration(net: &Dvass, text: &str) -> Result<Configuration> {
    let mut c = Cursor::new(text, 1);
    parse_config_body(&mut c, net, &mut Vars::default())
}

fn parse_petri(
    name: String,
    lines: &[(usize, &str)],
    allow_reserved: bool,
) -> Result<(Parsed, Vec<Warning>)> {
    let mut places = Vec::new();
    for &(no, line) in lines {
        if let Some(("places", rest)) = split_key(line) {
            places = name_list(rest, no, allow_reserved)?;
        }
    }
    let mut net = PetriNet { name, places, transitions: Vec::new(), marking: None, target: None };
    let mut scope = Vars::default();
    for &(no, line) in lines {
        let mut c = Cursor::new(line, no);
        let head = c.ident()?;
        match head {
            "places" => {}
            "trans" => {
                let tname = c.ident()?.to_string();
                check_name(&tname, no, allow_reserved)?;
                c.expect(':')?;
                let mut t = PetriTransition {
                    name: tname,
                    inputs: Vec::new(),
                    outputs: Vec::new(),
                    constraint: Vec::new(),
                };
                let mut section = "";
                while !c.at_end() {
                    if c.eat_str("in ") {
                        section = "in";
                        continue;
                    }
                    if c.eat_str("out ") {
                        section = "out";
                        continue;
                    }
                    if c.eat_str("where ") {
                        section = "where";
                        continue;
                    }
                    match section {
                        "in" | "out" => {
                            let p = lookup(&net.places, c.ident()?, no)?;
                            c.expect('(')?;
                            let x = c.ident()?.to_string();
                            c.expect(')')?;
                            if section == "in" { t.inputs.push((p, x)) } else { t.outputs.push((p, x)) }
                        }
                        "where" => {
                            let mut left = c.ident()?.to_string();
                            loop {
                                let rel = if c.eat_str("!=") || c.eat_str("≠") {
                                    Relation::Neq
                                } else if c.eat('=') {
                                    Relation::Eq
                                } else {
                                    break;
                                };
                                let right = c.ident()?.to_string();
                                t.constraint.push((left, rel, right.clone()));
                                left = right;
                            }
                        }
                        _ => return c.err("expected `in`, `out` or `where`"),
                    }
                }
                net.transitions.push(t);
            }
            "marking" | "target" => {
                c.expect(':')?;
                let mut v = DataVector::zero();
                while !c.at_end() {
                    let p = lookup(&net.places, c.ident()?, no)?;
                    c.expect(':')?;
                    c.expect('[')?;
                    while !c.eat(']') {
                        v.add_data(p, scope.atom(c.ident()?), 1);
                    }
                }
                if head == "marking" { net.marking = Some(v) } else { net.target = Some(v) }
            }
            other => return c.err(format!("unknown directive `{other}`")),
        }
    }
    Ok((Parsed::Petri(net), Vec::new()))
}

/// Variable name for the `i`-th atom of a rendered line.
fn var_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 { letter.to_string() } else { format!("{letter}{}", i / 26) }
}

fn atom_names(atoms: impl IntoIterator<Item = Atom>) -> BTreeMap<Atom, String> {
    let mut out = BTreeMap::new();
    for a in atoms {
        let n = out.len();
        out.entry(a).or_insert_with(|| var_name(n));
    }
    out
}

fn render_state(net: &Dvass, s: &State, names: &BTreeMap<Atom, String>) -> String {
    let mut out = net.locations[s.location].clone();
    if !net.registers.is_empty() {
        let regs: Vec<String> = net
            .registers
            .iter()
            .zip(&s.registers)
            .map(|(r, x)| match x {
                Some(a) => format!("{r}={}", names[a]),
                None => format!("{r}=-"),
            })
            .collect();
        let _ = write!(out, "[{}]", regs.join(", "));
    }
    out
}

fn render_effect(net: &Dvass, v: &DataVector, names: &BTreeMap<Atom, String>) -> String {
    let mut terms = Vec::new();
    let fmt_count = |n: i64| {
        let sign = if n > 0 { '+' } else { '-' };
        if n.abs() == 1 { sign.to_string() } else { format!("{sign}{}", n.abs()) }
    };
    for ((p, a), n) in &v.data {
        terms.push(format!("{}{}({})", fmt_count(*n), net.atom_places[*p], names[a]));
    }
    for (h, n) in &v.plain {
        terms.push(format!("{}{}", fmt_count(*n), net.plain_places[*h]));
    }
    terms.join(" ")
}

/// Renders the body of a `source:`/`target:` line.
pub fn render_configuration(net: &Dvass, c: &Configuration) -> String {
    let names = atom_names(c.state.registers.iter().flatten().copied().chain(c.marking.support()));
    render_config_with(net, c, &names)
}

fn render_config_with(net: &Dvass, c: &Configuration, names: &BTreeMap<Atom, String>) -> String {
    let mut out = render_state(net, &c.state, names);
    if !c.marking.plain.is_empty() {
        let items: Vec<String> =
            c.marking.plain.iter().map(|(h, n)| format!("{}:{n}", net.plain_places[*h])).collect();
        let _ = write!(out, " plain{{{}}}", items.join(", "));
    }
    if !c.marking.data.is_empty() {
        let mut rows = Vec::new();
        for (p, name) in net.atom_places.iter().enumerate() {
            let row = c.marking.row(p);
            if row.is_empty() {
                continue;
            }
            let toks: Vec<&str> = row
                .iter()
                .flat_map(|(a, n)| std::iter::repeat(names[a].as_str()).take(*n as usize))
                .collect();
            rows.push(format!("{name}:[{}]", toks.join(",")));
        }
        let _ = write!(out, " tokens{{{}}}", rows.join(", "));
    }
    out
}

/// Renders an instance in the DVASS format.
pub fn render(inst: &Instance) -> String {
    let net = &inst.net;
    let mut out = String::new();
    let _ = writeln!(out, "dvass {}", net.name);
    let _ = writeln!(out, "locations: {}", net.locations.join(" "));
    let _ = writeln!(out, "registers: {}", net.registers.join(" "));
    let _ = writeln!(out, "plain: {}", net.plain_places.join(" "));
    let _ = writeln!(out, "atom: {}", net.atom_places.join(" "));
    for (label, t) in net.labelled() {
        let atoms = t.source.registers.iter().flatten().copied().chain(t.target.registers.iter().flatten().copied()).chain(t.effect.support());
        let names = atom_names(atoms);
        let mut line = format!(
            "trans {label}: {} -> {}",
            render_state(net, &t.source, &names),
            render_state(net, &t.target, &names)
        );
        if !t.effect.is_zero() {
            let _ = write!(line, " eff: {}", render_effect(net, &t.effect, &names));
        }
        let _ = writeln!(out, "{line}");
    }
    let shared: Vec<Atom> = [&inst.source, &inst.target]
        .into_iter()
        .flatten()
        .flat_map(|c| c.state.registers.iter().flatten().copied().chain(c.marking.support()).collect::<Vec<_>>())
        .collect();
    let names = atom_names(shared);
    if let Some(s) = &inst.source {
        let _ = writeln!(out, "source: {}", render_config_with(net, s, &names));
    }
    if let Some(t) = &inst.target {
        let _ = writeln!(out, "target: {}", render_config_with(net, t, &names));
    }
    out
}

/// Renders a Petri net in its own format.
pub fn render_petri(net: &PetriNet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "petri {}", net.name);
    let _ = writeln!(out, "places: {}", net.places.join(" "));
    for t in &net.transitions {
        let mut line = format!("trans {}:", t.name);
        if !t.inputs.is_empty() {
            line.push_str(" in");
            for (p, x) in &t.inputs {
                let _ = write!(line, " {}({x})", net.places[*p]);
            }
        }
        if !t.outputs.is_empty() {
            line.push_str(" out");
            for (p, x) in &t.outputs {
                let _ = write!(line, " {}({x})", net.places[*p]);
            }
        }
        if !t.constraint.is_empty() {
            let cs: Vec<String> = t
                .constraint
                .iter()
                .map(|(x, r, y)| format!("{x}{}{y}", if *r == Relation::Eq { "=" } else { "!=" }))
                .collect();
            let _ = write!(line, " where {}", cs.join(", "));
        }
        let _ = writeln!(out, "{line}");
    }
    let atoms = [&net.marking, &net.target].into_iter().flatten().flat_map(|v| v.support());
    let names = atom_names(atoms);
    for (key, m) in [("marking", &net.marking), ("target", &net.target)] {
        if let Some(v) = m {
            let mut rows = Vec::new();
            for (p, name) in net.places.iter().enumerate() {
                let toks: Vec<&str> = v
                    .row(p)
                    .iter()
                    .flat_map(|(a, n)| std::iter::repeat(names[a].as_str()).take(*n as usize))
                    .collect();
                rows.push(format!("{name}:[{}]", toks.join(",")));
            }
            let _ = writeln!(out, "{key}: {}", rows.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "dvass demo\nlocations: l0 l1\nregisters: r\nplain: h\natom: p\n\
        trans t: l0[r=-] -> l1[r=a] eff: +p(b) -p(a) +h  # comment\n\
        source: l0[r=-] plain{h:2} tokens{p:[a,a,b]}\ntarget: l1[r=a]\n";

    #[test]
    fn parses_small_dvass() {
        let (Parsed::Dvass(inst), w) = parse(SMALL).unwrap() else { panic!() };
        assert!(w.is_empty());
        assert_eq!(inst.net.transitions.len(), 1);
        let src = inst.source.unwrap();
        assert_eq!(src.marking.plain_at(0), 2);
        assert_eq!(src.marking.place_size(0), Ok(3));
        let tgt = inst.target.unwrap();
        assert_eq!(tgt.state.registers[0], Some(0));
    }

    #[test]
    fn render_parse_round_trip() {
        let (Parsed::Dvass(inst), _) = parse(SMALL).unwrap() else { panic!() };
        let text = render(&inst);
        let (Parsed::Dvass(again), _) = parse(&text).unwrap() else { panic!() };
        assert_eq!(again.net.transitions, inst.net.transitions);
        assert_eq!(render(&again), text);
    }

    #[test]
    fn undeclared_names_report_the_line() {
        let err = parse("dvass x\nlocations: l\ntrans t: l -> m\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn reserved_prefix_is_rejected() {
        assert!(parse("dvass x\nlocations: $l\n").is_err());
        assert!(parse_with("dvass x\nlocations: $l\n", true).is_ok());
    }

    #[test]
    fn duplicate_orbit_warns() {
        let text = "dvass x\nlocations: l\natom: p\ntrans a: l -> l eff: +p(x)\ntrans b: l -> l eff: +p(y)\n";
        let (_, w) = parse(text).unwrap();
        assert_eq!(w, vec![Warning::DuplicateOrbit { line: 5, label: "b".into() }]);
    }

    #[test]
    fn empty_net_with_one_location() {
        let (Parsed::Dvass(inst), _) = parse("dvass e\nlocations: l\n").unwrap() else { panic!() };
        assert!(inst.net.transitions.is_empty());
    }
}

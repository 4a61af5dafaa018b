//! Human-readable output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use bireach_core::atoms::Atom;
use bireach_core::net::{render_configuration, Configuration, Dvass, State};
use bireach_core::vector::{OmegaConfiguration, OmegaValue};
use serde::Serialize;
use serde_json::Value;

/// Serialises `payload` and adds the schema version. Keys come out sorted.
pub fn json<T: Serialize>(kind: &str, payload: &T) -> Value {
    let mut v = serde_json::to_value(payload).expect("output types serialise");
    if !v.is_object() {
        v = serde_json::json!({ "result": v });
    }
    let map = v.as_object_mut().unwrap();
    map.insert("schema".into(), Value::from(1));
    map.insert("kind".into(), Value::from(kind));
    v
}

pub fn print_json(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

fn atom_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

fn names(atoms: impl IntoIterator<Item = Atom>) -> BTreeMap<Atom, String> {
    let set: BTreeSet<Atom> = atoms.into_iter().collect();
    set.into_iter().enumerate().map(|(i, a)| (a, atom_name(i))).collect()
}

fn state(net: &Dvass, s: &State, names: &BTreeMap<Atom, String>) -> String {
    let mut out = net.locations[s.location].clone();
    if !net.registers.is_empty() {
        let regs: Vec<String> = net
            .registers
            .iter()
            .zip(&s.registers)
            .map(|(r, v)| format!("{r}={}", v.map_or("-".to_string(), |a| names[&a].clone())))
            .collect();
        out.push_str(&format!("[{}]", regs.join(" ")));
    }
    out
}

/// For example `l  p1:ω  p2:{a:1 b:1}` where `ω{…}` lists exceptions to an
/// ω default.
pub fn omega_configuration(net: &Dvass, c: &OmegaConfiguration) -> String {
    let v = &c.valuation;
    let atoms = c.state.registers.iter().flatten().copied().chain(v.data.keys().map(|(_, a)| *a));
    let names = names(atoms);
    let mut parts = vec![state(net, &c.state, &names)];
    for (h, x) in &v.plain {
        parts.push(format!("{}:{x}", net.plain_places[*h]));
    }
    for (p, name) in net.atom_places.iter().enumerate() {
        let row: Vec<String> = v
            .data
            .iter()
            .filter(|((q, _), _)| *q == p)
            .map(|((_, a), x)| format!("{}:{x}", names[a]))
            .collect();
        let default = v.default_at(p) == OmegaValue::Omega;
        match (default, row.is_empty()) {
            (false, true) => {}
            (true, true) => parts.push(format!("{name}:ω")),
            (true, false) => parts.push(format!("{name}:ω{{{}}}", row.join(" "))),
            (false, false) => parts.push(format!("{name}:{{{}}}", row.join(" "))),
        }
    }
    parts.join("  ")
}

pub fn configuration(net: &Dvass, c: &Configuration) -> String {
    render_configuration(net, c)
}

//! Reading nets and configurations from files and flags.

use std::path::Path;

use anyhow::{Context, Result};
use bireach_core::net::{compile_petri, parse, parse_configuration, Configuration, Instance, Parsed, SplitMode};
use sha2::{Digest, Sha256};

pub struct Loaded {
    pub instance: Instance,
    pub digest: String,
    pub text: String,
}

pub fn load(path: &Path, split: SplitMode) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = instance_from_text(&text, split).with_context(|| format!("in {}", path.display()))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(Loaded { instance, digest, text })
}

pub fn instance_from_text(text: &str, split: SplitMode) -> Result<Instance> {
    let (parsed, warnings) = parse(text)?;
    for w in warnings {
        eprintln!("warning: {w:?}");
    }
    Ok(match parsed {
        Parsed::Dvass(inst) => inst,
        Parsed::Petri(net) => compile_petri(&net, split)?,
    })
}

/// The configuration given on the command line, or the one in the file.
pub fn configuration(
    inst: &Instance,
    flag: Option<&str>,
    stored: Option<&Configuration>,
    what: &'static str,
) -> Result<Configuration> {
    match (flag, stored) {
        (Some(text), _) => parse_configuration(&inst.net, text).with_context(|| format!("parsing --{what}")),
        (None, Some(c)) => Ok(c.clone()),
        (None, None) => anyhow::bail!("no {what} configuration: give --{what} or a `{}` line", line_name(what)),
    }
}

fn line_name(what: &str) -> &'static str {
    if what == "tgt" {
        "target:"
    } else {
        "source:"
    }
}

pub fn endpoints(inst: &Instance, src: Option<&str>, tgt: Option<&str>) -> Result<(Configuration, Configuration)> {
    let s = configuration(inst, src, inst.source.as_ref(), "src")?;
    let t = configuration(inst, tgt, inst.target.as_ref(), "tgt")?;
    Ok((s, t))
}

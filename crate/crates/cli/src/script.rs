//! Batch scripts of apply and redo steps, one per line:
//!
//! ```text
//! # comments and blank lines are ignored
//! apply seq t5,t6,t7,t8 workflow:bank
//! apply {"kind": "caa", "otype": "workflow:client", "transitions": ["t0", "t3", "t4"]}
//! redo kl273
//! redo last
//! ```

use std::collections::BTreeSet;

use inexa_core::abstraction::AbstractionRef;
use inexa_core::ocel::{AbstractionKind, ObjectId, ObjectType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Apply(AbstractionRef),
    Redo(ObjectId),
    RedoLast,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ScriptError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn parse_apply(rest: &str) -> Result<AbstractionRef, String> {
    if rest.starts_with('{') {
        return serde_json::from_str(rest).map_err(|e| e.to_string());
    }
    let mut parts = rest.splitn(3, char::is_whitespace);
    let (Some(kind), Some(ts), Some(otype)) = (parts.next(), parts.next(), parts.next()) else {
        return Err("expected `apply <kind> <t1,t2,...> <object type>`".into());
    };
    let kind = AbstractionKind::from_suffix(kind).ok_or_else(|| format!("unknown kind `{kind}`"))?;
    let otype = ObjectType::parse(otype.trim()).map_err(|e| e.to_string())?;
    let transitions: BTreeSet<_> = ts.split(',').filter(|s| !s.is_empty()).map(Into::into).collect();
    Ok(AbstractionRef {
        kind,
        otype,
        transitions,
    })
}

pub fn parse(src: &str) -> Result<Vec<Step>, ScriptError> {
    let mut steps = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ScriptError { line: i + 1, message };
        let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let step = match cmd {
            "apply" => Step::Apply(parse_apply(rest).map_err(err)?),
            "redo" if rest == "last" => Step::RedoLast,
            "redo" if !rest.is_empty() && !rest.contains(char::is_whitespace) => Step::Redo(ObjectId::new(rest)),
            "redo" => return Err(err("expected `redo <oid>` or `redo last`".into())),
            other => return Err(err(format!("unknown command `{other}`"))),
        };
        steps.push(step);
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_apply_forms_agree() {
        let a = parse("apply seq t5,t6,t7,t8 workflow:bank").unwrap();
        let b = parse(r#"apply {"kind": "seq", "otype": "workflow:bank", "transitions": ["t8", "t7", "t6", "t5"]}"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn object_types_may_contain_spaces() {
        let s = parse("# x\n\napply cla t9,t10,t11,t12 workflow:lc:finalize account opening\nredo last\nredo kl273").unwrap();
        let Step::Apply(r) = &s[0] else { panic!() };
        assert_eq!(r.otype.short_name(), "finalize account opening");
        assert_eq!(s[1..], [Step::RedoLast, Step::Redo(ObjectId::new("kl273"))]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse("redo\n").unwrap_err().line, 1);
        assert_eq!(parse("\nfly away").unwrap_err().line, 2);
        assert!(parse("apply nope t1 workflow:a").unwrap_err().message.contains("nope"));
    }
}

use super::ast::*;

const UNARY: u8 = 6;
const POSTFIX: u8 = 7;
const PRIMARY: u8 = 8;

/// Renders a program as source that parses back to the same tree.
pub fn pretty(program: &Program) -> String {
    program.stmts.iter().map(stmt).collect::<Vec<_>>().join("\n")
}

fn block(body: &[Stmt]) -> String {
    if body.is_empty() {
        return "[ ]".into();
    }
    format!("[ {} ]", body.iter().map(stmt).collect::<Vec<_>>().join(" "))
}

/// Full expression, parenthesized when it would start with `-` and so
/// glue onto whatever precedes it.
fn standalone(e: &Expr) -> String {
    let s = expr(e, 0);
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

pub fn stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Ask { target, body } => format!("ask {} {}", expr(target, 0), block(body)),
        StmtKind::Set { name, value } => format!("set {name} {}", expr(value, 0)),
        StmtKind::Let { name, value } => format!("let {name} {}", expr(value, 0)),
        StmtKind::Create { breed, count, body } => {
            let head = match breed {
                Some(b) => format!("create-{b} {}", expr(count, 0)),
                None => format!("crt {}", expr(count, 0)),
            };
            match body {
                Some(b) => format!("{head} {}", block(b)),
                None => head,
            }
        }
        StmtKind::Command { name, args } => {
            let mut out = name.clone();
            for a in args {
                out.push(' ');
                out.push_str(&standalone(a));
            }
            out
        }
        StmtKind::Report(e) => standalone(e),
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Number(_) | ExprKind::Var(_) => PRIMARY,
        ExprKind::With { .. } | ExprKind::InRadius { .. } => POSTFIX,
        ExprKind::Unary(..) | ExprKind::Call { .. } => UNARY,
        ExprKind::Binary(op, ..) => op.precedence(),
    }
}

/// Renders `e` in a position that requires at least binding level `min`.
pub fn expr(e: &Expr, min: u8) -> String {
    let s = match &e.kind {
        ExprKind::Number(v) => format!("{v}"),
        ExprKind::Var(n) => n.clone(),
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            format!("{} {} {}", expr(l, p), op.symbol(), expr(r, p + 1))
        }
        ExprKind::Unary(UnOp::Not, x) => format!("not {}", expr(x, UNARY)),
        ExprKind::Unary(UnOp::Neg, x) => format!("-{}", expr(x, UNARY)),
        ExprKind::Call { name, args } => {
            let mut out = name.clone();
            for a in args {
                match a {
                    Arg::Value(x) => {
                        out.push(' ');
                        out.push_str(&expr(x, UNARY));
                    }
                    Arg::Block(x) => {
                        out.push_str(" [ ");
                        out.push_str(&expr(x, 0));
                        out.push_str(" ]");
                    }
                }
            }
            out
        }
        ExprKind::With { set, pred } => format!("{} with [ {} ]", expr(set, POSTFIX), expr(pred, 0)),
        ExprKind::InRadius { set, radius } => {
            format!("{} in-radius {}", expr(set, POSTFIX), expr(radius, PRIMARY))
        }
    };
    if level(e) < min {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::console::{lexer::tokenize, parser::parse};

    fn roundtrip(src: &str) -> String {
        let first = parse(&tokenize(src).unwrap()).unwrap();
        let printed = pretty(&first);
        let second = parse(&tokenize(&printed).unwrap()).unwrap();
        assert_eq!(first.without_spans(), second.without_spans(), "{src} -> {printed}");
        printed
    }

    #[test]
    fn recolor_command() {
        assert_eq!(
            roundtrip("ask nodes with [power < 0.5] [set color green]"),
            "ask nodes with [ power < 0.5 ] [ set color green ]"
        );
    }

    #[test]
    fn parentheses_only_where_needed() {
        assert_eq!(roundtrip("(1 + 2) * 3"), "(1 + 2) * 3");
        assert_eq!(roundtrip("1 + (2 * 3)"), "1 + 2 * 3");
        assert_eq!(roundtrip("8 - (2 - 1)"), "8 - (2 - 1)");
        assert_eq!(roundtrip("random (5 + 1)"), "random (5 + 1)");
        assert_eq!(roundtrip("(random 5) with [x]"), "(random 5) with [ x ]");
        assert_eq!(roundtrip("nodes in-radius (1 + 2)"), "nodes in-radius (1 + 2)");
    }

    #[test]
    fn negatives_do_not_glue() {
        roundtrip("setxy 1 (- 2)");
        roundtrip("set x 1 (- 5)");
        roundtrip("- - 3");
        roundtrip("crt 3 [ set heading -90 ] count nodes");
    }
}

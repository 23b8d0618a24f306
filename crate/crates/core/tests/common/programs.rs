//! Random console programs: well-formed ones built from the grammar, and
//! mutations of them that are guaranteed to be malformed.

use rand::seq::SliceRandom;
use rand::Rng;

const VARS: &[&str] = &["x", "y", "power", "color", "heading", "value", "ticks", "nodes", "turtles", "k"];
const OPS: &[&str] = &["+", "-", "*", "/", "<", ">", "<=", ">=", "=", "!=", "and", "or"];
const UNARY_CALLS: &[&str] = &["count", "random", "random-float", "abs", "sqrt", "floor", "round", "one-of"];
const BLOCK_CALLS: &[&str] = &["min-one-of", "max-one-of"];

fn number(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.5) {
        rng.gen_range(0..200).to_string()
    } else {
        format!("{}.{}", rng.gen_range(0..50), rng.gen_range(1..1000))
    }
}

fn primary(rng: &mut impl Rng, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return if rng.gen_bool(0.5) {
            number(rng)
        } else {
            VARS.choose(rng).unwrap().to_string()
        };
    }
    match rng.gen_range(0..4) {
        0 => format!("( {} )", expr(rng, depth - 1)),
        1 => format!("{} {}", UNARY_CALLS.choose(rng).unwrap(), unary(rng, depth - 1)),
        2 => format!(
            "{} {} [ {} ]",
            BLOCK_CALLS.choose(rng).unwrap(),
            unary(rng, depth - 1),
            expr(rng, depth - 1)
        ),
        _ => format!("( - {} )", unary(rng, depth - 1)),
    }
}

fn postfix(rng: &mut impl Rng, depth: u32) -> String {
    let mut e = primary(rng, depth);
    if depth > 0 {
        match rng.gen_range(0..6) {
            0 => e = format!("{e} with [ {} ]", expr(rng, depth - 1)),
            1 => e = format!("{e} in-radius {}", primary(rng, depth - 1)),
            _ => {}
        }
    }
    e
}

fn unary(rng: &mut impl Rng, depth: u32) -> String {
    if depth > 0 && rng.gen_bool(0.1) {
        format!("not {}", unary(rng, depth - 1))
    } else {
        postfix(rng, depth)
    }
}

pub fn expr(rng: &mut impl Rng, depth: u32) -> String {
    let mut e = unary(rng, depth);
    while depth > 0 && rng.gen_bool(0.3) {
        e = format!("{e} {} {}", OPS.choose(rng).unwrap(), unary(rng, depth - 1));
    }
    e
}

fn block(rng: &mut impl Rng, depth: u32) -> String {
    let n = rng.gen_range(0..3);
    let body: Vec<String> = (0..n).map(|_| stmt(rng, depth)).collect();
    format!("[ {} ]", body.join(" "))
}

pub fn stmt(rng: &mut impl Rng, depth: u32) -> String {
    let d = depth.saturating_sub(1);
    match rng.gen_range(0..10) {
        0 if depth > 0 => format!("ask {} {}", postfix(rng, d), block(rng, d)),
        1 => format!("set {} {}", VARS.choose(rng).unwrap(), expr(rng, d)),
        2 => format!("let t{} {}", rng.gen_range(0..5), expr(rng, d)),
        3 if depth > 0 && rng.gen_bool(0.5) => format!("crt {} {}", number(rng), block(rng, d)),
        3 => format!("create-nodes {}", number(rng)),
        4 => format!("fd {}", expr(rng, d)),
        5 => format!("rt {}", expr(rng, d)),
        6 => format!("setxy {} {}", postfix(rng, d), postfix(rng, d)),
        7 => "die".to_string(),
        _ => expr(rng, d),
    }
}

/// One to four statements on one or more lines.
pub fn program(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..5);
    let stmts: Vec<String> = (0..n).map(|_| stmt(rng, 3)).collect();
    let sep = if rng.gen_bool(0.5) { "\n" } else { " " };
    stmts.join(sep)
}

/// Applies one edit that cannot leave the program well-formed.
pub fn mutate(src: &str, rng: &mut impl Rng) -> String {
    let cuts: Vec<usize> = std::iter::once(0)
        .chain(src.char_indices().filter(|(_, c)| *c == ' ' || *c == '\n').map(|(i, _)| i))
        .chain(std::iter::once(src.len()))
        .collect();
    let at = *cuts.choose(rng).unwrap();
    let (head, tail) = src.split_at(at);
    match rng.gen_range(0..5) {
        // unbalanced brackets either way
        0 => format!("{head} [ {tail}"),
        1 => format!("{head} ] {tail}"),
        // lexical errors
        2 => format!("{head} 12abc {tail}"),
        3 => format!("{head} \"open string\n{tail}"),
        // a statement that is missing its argument
        _ => format!("{src}\nask"),
    }
}

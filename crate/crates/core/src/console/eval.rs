use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use super::ast::*;
use super::{ConsoleError, Span};
use crate::agentset::{self, AgentSet};
use crate::color;
use crate::fmt::g17;
use crate::rng::{self, SimRng};
use crate::world::{AgentId, Position, SimState};

/// Breed created by plain `crt`.
pub const DEFAULT_BREED: &str = "node";

const TURTLE_BUILTINS: [&str; 5] = ["who", "xcor", "ycor", "heading", "color"];
const PATCH_BUILTINS: [&str; 3] = ["pxcor", "pycor", "pcolor"];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Agent(AgentId),
    Agents(AgentSet),
    Patches,
    Nobody,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => f.write_str(&g17(*v)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Agent(id) => write!(f, "(agent {id})"),
            Value::Agents(set) => write!(f, "agentset of {}", set.len()),
            Value::Patches => f.write_str("patches"),
            Value::Nobody => f.write_str("nobody"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Observer,
    Turtle,
    Patch,
}

fn is_all_set(state: &SimState, e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Var(n) => n == "turtles" || n == "patches" || state.breeds.singular_of(n).is_some(),
        _ => false,
    }
}

/// Static context rules: who may ask all agents, which primitives need a
/// turtle, and what patch blocks may contain.
pub fn check(state: &SimState, program: &Program) -> Result<(), ConsoleError> {
    check_block(state, &program.stmts, Mode::Observer)
}

fn check_block(state: &SimState, body: &[Stmt], mode: Mode) -> Result<(), ConsoleError> {
    body.iter().try_for_each(|s| check_stmt(state, s, mode))
}

fn check_stmt(state: &SimState, s: &Stmt, mode: Mode) -> Result<(), ConsoleError> {
    if mode == Mode::Patch {
        return match &s.kind {
            StmtKind::Set { name, value } if name == "pcolor" => check_expr(state, value, mode),
            _ => Err(ConsoleError::check("patches only support `set pcolor`", s.span)),
        };
    }
    match &s.kind {
        StmtKind::Ask { target, body } => {
            if mode != Mode::Observer && is_all_set(state, target) {
                return Err(ConsoleError::check(
                    "only the observer can ask all turtles or all patches",
                    target.span,
                ));
            }
            check_expr(state, target, mode)?;
            let inner = match &target.kind {
                ExprKind::Var(n) if n == "patches" => Mode::Patch,
                _ => Mode::Turtle,
            };
            check_block(state, body, inner)
        }
        StmtKind::Set { name, value } => {
            if mode == Mode::Observer && (TURTLE_BUILTINS.contains(&name.as_str()) || PATCH_BUILTINS.contains(&name.as_str())) {
                return Err(ConsoleError::check(format!("`{name}` needs a turtle context"), s.span));
            }
            if name == "who" {
                return Err(ConsoleError::check("`who` is read-only", s.span));
            }
            check_expr(state, value, mode)
        }
        StmtKind::Let { value, .. } => check_expr(state, value, mode),
        StmtKind::Create { count, body, .. } => {
            if mode != Mode::Observer {
                return Err(ConsoleError::check("only the observer can create turtles", s.span));
            }
            check_expr(state, count, mode)?;
            match body {
                Some(b) => check_block(state, b, Mode::Turtle),
                None => Ok(()),
            }
        }
        StmtKind::Command { name, args } => {
            let observer_only = matches!(name.as_str(), "ca" | "clear-all");
            if observer_only && mode != Mode::Observer {
                return Err(ConsoleError::check(format!("only the observer can use `{name}`"), s.span));
            }
            if !observer_only && mode == Mode::Observer {
                return Err(ConsoleError::check(format!("`{name}` needs a turtle context"), s.span));
            }
            args.iter().try_for_each(|a| check_expr(state, a, mode))
        }
        StmtKind::Report(e) => check_expr(state, e, mode),
    }
}

fn check_expr(state: &SimState, e: &Expr, mode: Mode) -> Result<(), ConsoleError> {
    match &e.kind {
        ExprKind::Number(_) => Ok(()),
        ExprKind::Var(n) => {
            let turtle_only = TURTLE_BUILTINS.contains(&n.as_str()) || n == "link-neighbors" || n == "self";
            if mode == Mode::Observer && (turtle_only || PATCH_BUILTINS.contains(&n.as_str())) {
                Err(ConsoleError::check(format!("`{n}` needs a turtle context"), e.span))
            } else if mode == Mode::Patch && turtle_only {
                Err(ConsoleError::check(format!("`{n}` needs a turtle context"), e.span))
            } else {
                Ok(())
            }
        }
        ExprKind::Binary(_, l, r) => {
            check_expr(state, l, mode)?;
            check_expr(state, r, mode)
        }
        ExprKind::Unary(_, x) => check_expr(state, x, mode),
        ExprKind::Call { args, .. } => args.iter().try_for_each(|a| match a {
            Arg::Value(x) => check_expr(state, x, mode),
            Arg::Block(x) => check_expr(state, x, Mode::Turtle),
        }),
        ExprKind::With { set, pred } => {
            check_expr(state, set, mode)?;
            check_expr(state, pred, Mode::Turtle)
        }
        ExprKind::InRadius { set, radius } => {
            if mode != Mode::Turtle {
                return Err(ConsoleError::check("`in-radius` needs a turtle context", e.span));
            }
            check_expr(state, set, mode)?;
            check_expr(state, radius, mode)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ctx {
    Observer,
    Turtle(AgentId),
    Patch(i64, i64),
}

enum Flow {
    Continue,
    /// The current agent died; skip the rest of its block.
    Stop,
}

struct Eval<'a> {
    state: &'a mut SimState,
    rng: &'a mut SimRng,
    scopes: Vec<BTreeMap<String, Value>>,
    out: Vec<Value>,
}

/// Runs a checked program in observer context. Mutations are applied
/// immediately; callers decide when that is allowed.
pub fn execute(state: &mut SimState, program: &Program, rng: &mut SimRng) -> Result<Vec<Value>, ConsoleError> {
    let mut ev = Eval {
        state,
        rng,
        scopes: vec![BTreeMap::new()],
        out: Vec::new(),
    };
    ev.block(&program.stmts, Ctx::Observer)?;
    Ok(ev.out)
}

fn err(span: Span, msg: impl Into<String>) -> ConsoleError {
    ConsoleError::runtime(msg, span)
}

fn sim_err(span: Span, e: crate::SimError) -> ConsoleError {
    err(span, e.to_string())
}

impl<'a> Eval<'a> {
    fn block(&mut self, body: &[Stmt], ctx: Ctx) -> Result<Flow, ConsoleError> {
        self.scopes.push(BTreeMap::new());
        let mut flow = Flow::Continue;
        for s in body {
            match self.stmt(s, ctx) {
                Ok(Flow::Continue) => {}
                Ok(Flow::Stop) => {
                    flow = Flow::Stop;
                    break;
                }
                Err(e) => {
                    self.scopes.pop();
                    return Err(e);
                }
            }
        }
        self.scopes.pop();
        Ok(flow)
    }

    fn in_agent(&mut self, body: &[Stmt], id: AgentId) -> Result<(), ConsoleError> {
        self.block(body, Ctx::Turtle(id)).map_err(|mut e| {
            if !e.message.starts_with("agent ") {
                e.message = format!("agent {id}: {}", e.message);
            }
            e
        })?;
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, ctx: Ctx) -> Result<Flow, ConsoleError> {
        match &s.kind {
            StmtKind::Ask { target, body } => {
                match self.expr(target, ctx)? {
                    Value::Agents(set) => {
                        let mut order = set.into_vec();
                        order.shuffle(self.rng);
                        for id in order {
                            if self.state.is_alive(id) {
                                self.in_agent(body, id)?;
                            }
                        }
                    }
                    Value::Agent(id) => {
                        if self.state.is_alive(id) {
                            self.in_agent(body, id)?;
                        }
                    }
                    Value::Patches => {
                        let mut coords: Vec<(i64, i64)> =
                            self.state.patches().iter().map(|p| (p.pxcor, p.pycor)).collect();
                        coords.shuffle(self.rng);
                        for (px, py) in coords {
                            self.block(body, Ctx::Patch(px, py))?;
                        }
                    }
                    other => return Err(err(target.span, format!("ask expected agents, got {other}"))),
                }
                Ok(Flow::Continue)
            }
            StmtKind::Set { name, value } => {
                let v = self.expr(value, ctx)?;
                self.assign(name, v, ctx, s.span)?;
                Ok(Flow::Continue)
            }
            StmtKind::Let { name, value } => {
                let v = self.expr(value, ctx)?;
                self.scopes.last_mut().expect("scope").insert(name.clone(), v);
                Ok(Flow::Continue)
            }
            StmtKind::Create { breed, count, body } => {
                let n = self.number(count, ctx)?;
                if !(n >= 0.0) || !n.is_finite() {
                    return Err(err(count.span, format!("cannot create {} turtles", g17(n))));
                }
                let singular = match breed {
                    None => DEFAULT_BREED.to_string(),
                    Some(plural) => self.breed_singular(plural, s.span)?,
                };
                let ids = self
                    .state
                    .create_agents(self.rng, &singular, n as usize, |_, _, _| {})
                    .map_err(|e| sim_err(s.span, e))?;
                if let Some(body) = body {
                    for id in ids {
                        if self.state.is_alive(id) {
                            self.in_agent(body, id)?;
                        }
                    }
                }
                Ok(Flow::Continue)
            }
            StmtKind::Command { name, args } => self.command(name, args, ctx, s.span),
            StmtKind::Report(e) => {
                let v = self.expr(e, ctx)?;
                self.out.push(v);
                Ok(Flow::Continue)
            }
        }
    }

    fn breed_singular(&self, plural: &str, span: Span) -> Result<String, ConsoleError> {
        if let Some(s) = self.state.breeds.singular_of(plural) {
            return Ok(s.to_string());
        }
        if plural == "turtles" {
            return Ok(DEFAULT_BREED.to_string());
        }
        match plural.strip_suffix('s') {
            Some(s) if !s.is_empty() && !self.state.breeds.is_closed() => Ok(s.to_string()),
            _ => Err(err(span, format!("unknown breed {plural}"))),
        }
    }

    fn command(&mut self, name: &str, args: &[Expr], ctx: Ctx, span: Span) -> Result<Flow, ConsoleError> {
        if matches!(name, "ca" | "clear-all") {
            self.state.clear_all();
            return Ok(Flow::Continue);
        }
        let Ctx::Turtle(id) = ctx else {
            return Err(err(span, format!("`{name}` needs a turtle context")));
        };
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.number(a, ctx)?);
        }
        let res = match name {
            "fd" | "forward" => self.state.move_forward(id, vals[0]).map(|_| ()),
            "bk" | "back" => self.state.move_forward(id, -vals[0]).map(|_| ()),
            "rt" | "right" => self.state.turn(id, vals[0]).map(|_| ()),
            "lt" | "left" => self.state.turn(id, -vals[0]).map(|_| ()),
            "setxy" => self.state.set_xy(id, vals[0], vals[1]).map(|_| ()),
            "die" => {
                self.state.kill(id).map_err(|e| sim_err(span, e))?;
                return Ok(Flow::Stop);
            }
            other => return Err(err(span, format!("unknown command {other}"))),
        };
        res.map_err(|e| sim_err(span, e))?;
        Ok(Flow::Continue)
    }

    fn local_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.scopes.iter_mut().rev().find_map(|s| s.get_mut(name))
    }

    fn local(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn assign(&mut self, name: &str, v: Value, ctx: Ctx, span: Span) -> Result<(), ConsoleError> {
        if let Some(slot) = self.local_mut(name) {
            *slot = v;
            return Ok(());
        }
        let Value::Number(x) = v else {
            return Err(err(span, format!("`{name}` can only hold a number, got {v}")));
        };
        match ctx {
            Ctx::Patch(px, py) => self.state.set_pcolor(px, py, x).map_err(|e| sim_err(span, e)),
            Ctx::Turtle(id) => {
                if name == "pcolor" {
                    let (px, py) = self.patch_here(id, span)?;
                    return self.state.set_pcolor(px, py, x).map_err(|e| sim_err(span, e));
                }
                let agent = self.state.agent(id).map_err(|e| sim_err(span, e))?;
                let own = TURTLE_BUILTINS.contains(&name) || agent.has(name);
                if !own && self.state.globals.contains_key(name) {
                    self.state.globals.insert(name.to_string(), x);
                    return Ok(());
                }
                self.state.set_agent_var(id, name, x).map_err(|e| sim_err(span, e))
            }
            Ctx::Observer => {
                self.state.globals.insert(name.to_string(), x);
                Ok(())
            }
        }
    }

    fn patch_here(&self, id: AgentId, span: Span) -> Result<(i64, i64), ConsoleError> {
        let a = self.state.agent(id).map_err(|e| sim_err(span, e))?;
        let g = self.state.geometry();
        let i = g
            .patch_index_at(a.position())
            .ok_or_else(|| err(span, "agent is outside every patch"))?;
        let p = &self.state.patches()[i];
        Ok((p.pxcor, p.pycor))
    }

    fn number(&mut self, e: &Expr, ctx: Ctx) -> Result<f64, ConsoleError> {
        match self.expr(e, ctx)? {
            Value::Number(x) => Ok(x),
            other => Err(err(e.span, format!("expected a number, got {other}"))),
        }
    }

    fn boolean(&mut self, e: &Expr, ctx: Ctx) -> Result<bool, ConsoleError> {
        match self.expr(e, ctx)? {
            Value::Bool(b) => Ok(b),
            other => Err(err(e.span, format!("expected true or false, got {other}"))),
        }
    }

    fn agents(&mut self, e: &Expr, ctx: Ctx) -> Result<AgentSet, ConsoleError> {
        match self.expr(e, ctx)? {
            Value::Agents(set) => Ok(set),
            Value::Patches => Err(err(e.span, "patch sets are only usable with ask and count")),
            other => Err(err(e.span, format!("expected agents, got {other}"))),
        }
    }

    fn var(&mut self, name: &str, ctx: Ctx, span: Span) -> Result<Value, ConsoleError> {
        if let Some(v) = self.local(name) {
            return Ok(v.clone());
        }
        match ctx {
            Ctx::Turtle(id) => {
                let a = self.state.agent(id).map_err(|e| sim_err(span, e))?;
                if TURTLE_BUILTINS.contains(&name) || a.has(name) {
                    return a.get(name).map(Value::Number).map_err(|e| sim_err(span, e));
                }
                if PATCH_BUILTINS.contains(&name) {
                    let (px, py) = self.patch_here(id, span)?;
                    return Ok(Value::Number(self.patch_var(px, py, name)));
                }
                match name {
                    "self" => return Ok(Value::Agent(id)),
                    "link-neighbors" => {
                        return agentset::link_neighbors(self.state, id)
                            .map(Value::Agents)
                            .map_err(|e| sim_err(span, e))
                    }
                    _ => {}
                }
            }
            Ctx::Patch(px, py) if PATCH_BUILTINS.contains(&name) => {
                return Ok(Value::Number(self.patch_var(px, py, name)));
            }
            _ => {}
        }
        if let Some(v) = self.state.globals.get(name) {
            return Ok(Value::Number(*v));
        }
        let g = *self.state.geometry();
        Ok(match name {
            "ticks" => Value::Number(self.state.tick as f64),
            "random-pxcor" => Value::Number(self.rng.gen_range(g.min_pxcor..=g.max_pxcor) as f64),
            "random-pycor" => Value::Number(self.rng.gen_range(g.min_pycor..=g.max_pycor) as f64),
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            "nobody" => Value::Nobody,
            "patches" => Value::Patches,
            "turtles" => Value::Agents(agentset::all(self.state, None)),
            _ => {
                if let Some(c) = color::by_name(name) {
                    Value::Number(c)
                } else if let Some(s) = self.state.breeds.singular_of(name) {
                    Value::Agents(agentset::all(self.state, Some(s)))
                } else {
                    return Err(err(span, format!("unknown variable {name}")));
                }
            }
        })
    }

    fn patch_var(&self, px: i64, py: i64, name: &str) -> f64 {
        match name {
            "pxcor" => px as f64,
            "pycor" => py as f64,
            _ => self.state.patch(px, py).map_or(0.0, |p| p.pcolor),
        }
    }

    fn expr(&mut self, e: &Expr, ctx: Ctx) -> Result<Value, ConsoleError> {
        match &e.kind {
            ExprKind::Number(v) => Ok(Value::Number(*v)),
            ExprKind::Var(n) => self.var(n, ctx, e.span),
            ExprKind::Unary(UnOp::Not, x) => Ok(Value::Bool(!self.boolean(x, ctx)?)),
            ExprKind::Unary(UnOp::Neg, x) => Ok(Value::Number(-self.number(x, ctx)?)),
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, ctx, e.span),
            ExprKind::Call { name, args } => self.call(name, args, ctx, e.span),
            ExprKind::With { set, pred } => {
                let set = self.agents(set, ctx)?;
                let mut keep = Vec::new();
                for id in set.iter() {
                    if self.boolean(pred, Ctx::Turtle(id))? {
                        keep.push(id);
                    }
                }
                Ok(Value::Agents(AgentSet::from_ids(keep)))
            }
            ExprKind::InRadius { set, radius } => {
                let Ctx::Turtle(me) = ctx else {
                    return Err(err(e.span, "`in-radius` needs a turtle context"));
                };
                let set = self.agents(set, ctx)?;
                let r = self.number(radius, ctx)?;
                let center: Position = self.state.agent(me).map_err(|x| sim_err(e.span, x))?.position();
                let near = agentset::in_radius(self.state, center, r, None).map_err(|x| sim_err(radius.span, x))?;
                Ok(Value::Agents(AgentSet::from_ids(
                    set.iter().filter(|id| near.contains(*id)),
                )))
            }
        }
    }

    fn binary(&mut self, op: BinOp, l: &Expr, r: &Expr, ctx: Ctx, span: Span) -> Result<Value, ConsoleError> {
        match op {
            BinOp::And => return Ok(Value::Bool(self.boolean(l, ctx)? && self.boolean(r, ctx)?)),
            BinOp::Or => return Ok(Value::Bool(self.boolean(l, ctx)? || self.boolean(r, ctx)?)),
            BinOp::Eq | BinOp::Ne => {
                let a = self.expr(l, ctx)?;
                let b = self.expr(r, ctx)?;
                let same = a == b;
                return Ok(Value::Bool(if op == BinOp::Eq { same } else { !same }));
            }
            _ => {}
        }
        let a = self.number(l, ctx)?;
        let b = self.number(r, ctx)?;
        Ok(match op {
            BinOp::Lt => Value::Bool(a < b),
            BinOp::Gt => Value::Bool(a > b),
            BinOp::Le => Value::Bool(a <= b),
            BinOp::Ge => Value::Bool(a >= b),
            BinOp::Add => Value::Number(a + b),
            BinOp::Sub => Value::Number(a - b),
            BinOp::Mul => Value::Number(a * b),
            BinOp::Div => {
                if b == 0.0 {
                    return Err(err(span, "division by zero"));
                }
                Value::Number(a / b)
            }
            BinOp::And | BinOp::Or | BinOp::Eq | BinOp::Ne => unreachable!(),
        })
    }

    fn call(&mut self, name: &str, args: &[Arg], ctx: Ctx, span: Span) -> Result<Value, ConsoleError> {
        let first = args[0].expr();
        match name {
            "random" => {
                let n = self.number(first, ctx)?;
                Ok(Value::Number(rng::random_int(self.rng, n)))
            }
            "random-float" => {
                let n = self.number(first, ctx)?;
                Ok(Value::Number(rng::random_float(self.rng, n)))
            }
            "abs" => Ok(Value::Number(self.number(first, ctx)?.abs())),
            "floor" => Ok(Value::Number(self.number(first, ctx)?.floor())),
            "round" => Ok(Value::Number((self.number(first, ctx)? + 0.5).floor())),
            "sqrt" => {
                let x = self.number(first, ctx)?;
                if x < 0.0 {
                    return Err(err(span, format!("square root of negative {}", g17(x))));
                }
                Ok(Value::Number(x.sqrt()))
            }
            "turtle" => {
                let n = self.number(first, ctx)?;
                let id = n as AgentId;
                Ok(if n >= 0.0 && n.fract() == 0.0 && self.state.is_alive(id) {
                    Value::Agent(id)
                } else {
                    Value::Nobody
                })
            }
            "count" => match self.expr(first, ctx)? {
                Value::Agents(set) => Ok(Value::Number(set.len() as f64)),
                Value::Patches => Ok(Value::Number(self.state.patches().len() as f64)),
                other => Err(err(first.span, format!("count expected agents, got {other}"))),
            },
            "one-of" => {
                let set = self.agents(first, ctx)?;
                Ok(match set.ids().choose(self.rng) {
                    Some(&id) => Value::Agent(id),
                    None => Value::Nobody,
                })
            }
            "min-one-of" | "max-one-of" => {
                let set = self.agents(first, ctx)?;
                let key = args[1].expr();
                let mut best: Option<(f64, AgentId)> = None;
                for id in set.iter() {
                    let mut k = self.number(key, Ctx::Turtle(id))?;
                    if name == "max-one-of" {
                        k = -k;
                    }
                    if best.is_none_or(|(b, _)| k < b) {
                        best = Some((k, id));
                    }
                }
                Ok(best.map_or(Value::Nobody, |(_, id)| Value::Agent(id)))
            }
            other => Err(err(span, format!("unknown reporter {other}"))),
        }
    }
}

//! Line-oriented text formats: `.rvp` protocols, `.nbm` counter machines, `.vas` NB-VAS,
//! and configuration literals such as `q1:2,q5`.
//!
//! Every format is whitespace-token based and `#` starts a comment.

use std::collections::HashMap;
use std::fmt;

use crate::ident::is_identifier;
use crate::machines::{CounterMachine, Vas, VasTransition};
use crate::model::{Action, Configuration, Protocol};

/// A syntax or semantic error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.column, self.message)
    }
}

impl ParseError {
    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        self.file = file.into();
        self
    }
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { file: "<input>".into(), line: self.line, column: self.column, message: message.into() }
    }
}

/// Non-empty lines, each split into tokens, comments removed.
fn lex(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (col, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(col),
                (true, Some(s)) => {
                    toks.push(Token { text: &body[s..col], line: i + 1, column: body[..s].chars().count() + 1 });
                    start = None;
                }
                _ => {}
            }
        }
        if !toks.is_empty() {
            lines.push(toks);
        }
    }
    lines
}

fn eof(text: &str, message: impl Into<String>) -> ParseError {
    ParseError { file: "<input>".into(), line: text.lines().count().max(1), column: 1, message: message.into() }
}

struct Lines<'a> {
    src: &'a str,
    lines: std::iter::Peekable<std::vec::IntoIter<Vec<Token<'a>>>>,
}

impl<'a> Lines<'a> {
    fn new(src: &'a str) -> Self {
        Lines { src, lines: lex(src).into_iter().peekable() }
    }

    /// The next line, which must start with `keyword`; returns its arguments.
    fn expect(&mut self, keyword: &str) -> Result<(Token<'a>, Vec<Token<'a>>), ParseError> {
        match self.lines.next() {
            None => Err(eof(self.src, format!("missing `{keyword}` line"))),
            Some(mut toks) => {
                let head = toks.remove(0);
                if head.text != keyword {
                    return Err(head.err(format!("expected `{keyword}`, found `{}`", head.text)));
                }
                Ok((head, toks))
            }
        }
    }

    /// Like `expect`, but only consumes the line if it starts with `keyword`.
    fn optional(&mut self, keyword: &str) -> Option<(Token<'a>, Vec<Token<'a>>)> {
        match self.lines.peek() {
            Some(toks) if toks[0].text == keyword => self.expect(keyword).ok(),
            _ => None,
        }
    }
}

fn ident<'a>(t: &Token<'a>) -> Result<&'a str, ParseError> {
    if is_identifier(t.text) {
        Ok(t.text)
    } else {
        Err(t.err(format!("invalid identifier `{}`", t.text)))
    }
}

fn one<'a>(head: &Token<'a>, args: &[Token<'a>]) -> Result<&'a str, ParseError> {
    match args {
        [t] => ident(t),
        [] => Err(head.err(format!("`{}` needs one argument", head.text))),
        [_, extra, ..] => Err(extra.err("unexpected token")),
    }
}

/// Declares a list of distinct identifiers; returns name → index.
fn declare(args: &[Token<'_>], what: &str) -> Result<HashMap<String, usize>, ParseError> {
    let mut index = HashMap::new();
    for t in args {
        let name = ident(t)?;
        if index.insert(name.to_string(), index.len()).is_some() {
            return Err(t.err(format!("{what} `{name}` declared twice")));
        }
    }
    Ok(index)
}

fn known(t: &Token<'_>, index: &HashMap<String, usize>, what: &str) -> Result<usize, ParseError> {
    index.get(t.text).copied().ok_or_else(|| t.err(format!("unknown {what} `{}`", t.text)))
}

/// Parses the `.rvp` protocol format.
pub fn parse_protocol(text: &str) -> Result<Protocol, ParseError> {
    let mut lines = Lines::new(text);
    let (head, args) = lines.expect("protocol")?;
    let name = one(&head, &args)?;
    let (_, args) = lines.expect("states")?;
    let states = declare(&args, "state")?;
    let state_names: Vec<String> = args.iter().map(|t| t.text.to_string()).collect();
    let (head, args) = lines.expect("init")?;
    one(&head, &args)?;
    known(&args[0], &states, "state")?;
    let init = args[0].text;
    let (head, args) = lines.expect("final")?;
    one(&head, &args)?;
    known(&args[0], &states, "state")?;
    let fin = args[0].text;
    let (messages, msg_names) = match lines.optional("messages") {
        Some((_, args)) => (declare(&args, "message")?, args.iter().map(|t| t.text.to_string()).collect()),
        None => (HashMap::new(), Vec::new()),
    };
    let mut b = Protocol::builder(name).states(state_names).messages(msg_names).init(init).final_state(fin);
    for toks in lines.lines.by_ref() {
        let head = &toks[0];
        if head.text != "trans" {
            return Err(head.err(format!("expected `trans`, found `{}`", head.text)));
        }
        let [_, src, act, dst] = toks.as_slice() else {
            let at = toks.get(4).unwrap_or(head);
            return Err(at.err("`trans` takes exactly SRC ACTION DST"));
        };
        known(src, &states, "state")?;
        known(dst, &states, "state")?;
        if act.text != "tau" {
            match act.text.strip_prefix('!').or_else(|| act.text.strip_prefix('?')) {
                Some(m) if messages.contains_key(m) => {}
                Some(m) => return Err(act.err(format!("unknown message `{m}`"))),
                None => return Err(act.err(format!("malformed action `{}` (expected tau, !m or ?m)", act.text))),
            }
        }
        b = b.transition(src.text, act.text, dst.text);
    }
    b.build().map_err(|e| eof(text, e.to_string()))
}

/// Serialises a protocol in canonical `.rvp` form.
pub fn write_protocol(p: &Protocol) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol {}\n", p.name()));
    out.push_str(&format!("states {}\n", p.states().join(" ")));
    out.push_str(&format!("init {}\n", p.state_name(p.init())));
    out.push_str(&format!("final {}\n", p.state_name(p.final_state())));
    out.push_str(&join_line("messages", p.messages()));
    for t in p.transitions() {
        let act = match t.action {
            Action::Tau => "tau".to_string(),
            Action::Send(m) => format!("!{}", p.message_name(m)),
            Action::Recv(m) => format!("?{}", p.message_name(m)),
        };
        out.push_str(&format!("trans {} {} {}\n", p.state_name(t.src), act, p.state_name(t.dst)));
    }
    out
}

fn join_line(keyword: &str, items: &[String]) -> String {
    if items.is_empty() {
        format!("{keyword}\n")
    } else {
        format!("{keyword} {}\n", items.join(" "))
    }
}

/// Parses the `.nbm` counter machine format.
pub fn parse_machine(text: &str) -> Result<CounterMachine, ParseError> {
    let mut lines = Lines::new(text);
    let (head, args) = lines.expect("machine")?;
    let name = one(&head, &args)?;
    let (_, args) = lines.expect("locations")?;
    let locs = declare(&args, "location")?;
    let loc_names: Vec<String> = args.iter().map(|t| t.text.to_string()).collect();
    let (head, args) = lines.expect("init")?;
    one(&head, &args)?;
    known(&args[0], &locs, "location")?;
    let init = args[0].text;
    let (counters, counter_names) = match lines.optional("counters") {
        Some((_, args)) => (declare(&args, "counter")?, args.iter().map(|t| t.text.to_string()).collect()),
        None => (HashMap::new(), Vec::new()),
    };
    let restore = match lines.optional("restore") {
        Some((head, args)) => match args.as_slice() {
            [t] if t.text == "on" => true,
            [t] if t.text == "off" => false,
            [t, ..] => return Err(t.err("expected `on` or `off`")),
            [] => return Err(head.err("expected `on` or `off`")),
        },
        None => false,
    };
    let mut b = CounterMachine::builder(name)
        .locations(loc_names)
        .counters(counter_names)
        .init(init)
        .restore(restore);
    for toks in lines.lines.by_ref() {
        let head = &toks[0];
        if head.text != "trans" {
            return Err(head.err(format!("expected `trans`, found `{}`", head.text)));
        }
        let (src, op, dst) = match toks.as_slice() {
            [_, src, op, dst] => (src, vec![op.clone()], dst),
            [_, src, op, x, dst] => (src, vec![op.clone(), x.clone()], dst),
            _ => return Err(head.err("`trans` takes SRC OP DST")),
        };
        known(src, &locs, "location")?;
        known(dst, &locs, "location")?;
        match op.as_slice() {
            [o] if o.text == "nop" => {}
            [o] => return Err(o.err(format!("malformed operation `{}`", o.text))),
            [o, x] => {
                if !["inc", "dec", "nbdec", "zero?"].contains(&o.text) {
                    return Err(o.err(format!("unknown operation `{}`", o.text)));
                }
                known(x, &counters, "counter")?;
            }
            _ => unreachable!(),
        }
        let op_text: Vec<&str> = op.iter().map(|t| t.text).collect();
        b = b.transition(src.text, op_text.join(" "), dst.text);
    }
    b.build().map_err(|e| eof(text, e.to_string()))
}

/// Serialises a machine in canonical `.nbm` form.
pub fn write_machine(m: &CounterMachine) -> String {
    let mut out = String::new();
    out.push_str(&format!("machine {}\n", m.name()));
    out.push_str(&join_line("locations", m.locations()));
    out.push_str(&format!("init {}\n", m.location_name(m.init())));
    out.push_str(&join_line("counters", m.counters()));
    out.push_str(&format!("restore {}\n", if m.restore() { "on" } else { "off" }));
    for t in m.transitions() {
        out.push_str(&format!(
            "trans {} {} {}\n",
            m.location_name(t.src),
            m.show_op(t.op),
            m.location_name(t.dst)
        ));
    }
    out
}

fn number<T: std::str::FromStr>(t: &Token<'_>, what: &str) -> Result<T, ParseError> {
    t.text.parse().map_err(|_| t.err(format!("expected {what}, found `{}`", t.text)))
}

fn vector<T: std::str::FromStr>(head: &Token<'_>, args: &[Token<'_>], dim: usize, what: &str) -> Result<Vec<T>, ParseError> {
    if args.len() != dim {
        let at = args.get(dim).unwrap_or(head);
        return Err(at.err(format!("expected {dim} values, found {}", args.len())));
    }
    args.iter().map(|t| number(t, what)).collect()
}

/// Parses the `.vas` format.
pub fn parse_vas(text: &str) -> Result<Vas, ParseError> {
    let mut lines = Lines::new(text);
    let (head, args) = lines.expect("vas")?;
    let (name, dim) = match args.as_slice() {
        [n, d, k] if d.text == "dim" => (ident(n)?, number::<usize>(k, "a dimension")?),
        _ => return Err(head.err("expected `vas NAME dim D`")),
    };
    if dim == 0 {
        return Err(head.err("dimension must be at least 1"));
    }
    let (head, args) = lines.expect("init")?;
    let init = vector::<u64>(&head, &args, dim, "a non-negative integer")?;
    let (head, args) = lines.expect("target")?;
    let target = vector::<u64>(&head, &args, dim, "a non-negative integer")?;
    let mut transitions = Vec::new();
    for toks in lines.lines.by_ref() {
        let head = &toks[0];
        if head.text != "trans" {
            return Err(head.err(format!("expected `trans`, found `{}`", head.text)));
        }
        let Some(sep) = toks.iter().position(|t| t.text == ";") else {
            return Err(head.err("missing `;` between the blocking and non-blocking parts"));
        };
        let block = vector::<i64>(head, &toks[1..sep], dim, "an integer")?;
        let nb = vector::<u64>(&toks[sep], &toks[sep + 1..], dim, "a non-negative integer")?;
        transitions.push(VasTransition { block, nb });
    }
    Vas::new(name, dim, transitions, init, target).map_err(|e| eof(text, e.to_string()))
}

/// Serialises an NB-VAS in canonical `.vas` form.
pub fn write_vas(v: &Vas) -> String {
    let nums = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
    let mut out = format!("vas {} dim {}\n", v.name, v.dim);
    out.push_str(&format!("init {}\n", nums(&mut v.init.iter().map(u64::to_string))));
    out.push_str(&format!("target {}\n", nums(&mut v.target.iter().map(u64::to_string))));
    for t in &v.transitions {
        out.push_str(&format!(
            "trans {} ; {}\n",
            nums(&mut t.block.iter().map(i64::to_string)),
            nums(&mut t.nb.iter().map(u64::to_string))
        ));
    }
    out
}

/// Parses a configuration literal: comma-separated `state` or `state:k` items, `k ≥ 1`.
/// Repeated states add up.
pub fn parse_config(text: &str, p: &Protocol) -> Result<Configuration, ParseError> {
    let err = |column: usize, message: String| ParseError { file: "<config>".into(), line: 1, column, message };
    if text.trim().is_empty() {
        return Err(err(1, "empty configuration".into()));
    }
    let mut counts = Vec::new();
    let mut offset = 0;
    for item in text.split(',') {
        let column = offset + item.len() - item.trim_start().len() + 1;
        offset += item.len() + 1;
        let item = item.trim();
        let (name, k) = match item.split_once(':') {
            Some((n, k)) => {
                let k: u32 = k.trim().parse().map_err(|_| err(column, format!("bad count in `{item}`")))?;
                (n.trim(), k)
            }
            None => (item, 1),
        };
        if k == 0 {
            return Err(err(column, format!("count must be positive in `{item}`")));
        }
        let q = p.state_id(name).map_err(|_| err(column, format!("unknown state `{name}`")))?;
        counts.push((q, k));
    }
    Ok(Configuration::from_counts(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::machines::CounterOp;

    #[test]
    fn protocol_round_trip() {
        for p in [fixtures::fig1(), fixtures::p1(), fixtures::p2()] {
            let text = write_protocol(&p);
            let back = parse_protocol(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(write_protocol(&back), text);
        }
    }

    #[test]
    fn shipped_fixtures_match() {
        let fig1 = parse_protocol(include_str!("../../../fixtures/fig1.rvp")).unwrap();
        assert_eq!(fig1, fixtures::fig1());
        assert_eq!((fig1.num_states(), fig1.num_messages(), fig1.transitions().len()), (7, 3, 7));
        assert_eq!(parse_protocol(include_str!("../../../fixtures/p1.rvp")).unwrap(), fixtures::p1());
        assert_eq!(parse_protocol(include_str!("../../../fixtures/p2.rvp")).unwrap(), fixtures::p2());
        parse_machine(include_str!("../../../fixtures/minsky_halt.nbm")).unwrap();
        parse_machine(include_str!("../../../fixtures/restore_inc.nbm")).unwrap();
        parse_vas(include_str!("../../../fixtures/small.vas")).unwrap();
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse_protocol("# header\nprotocol t # name\n\nstates a b\ninit a\nfinal b\ntrans a tau b\n").unwrap();
        assert_eq!(p.num_states(), 2);
        assert_eq!(p.num_messages(), 0);
        assert_eq!(p.transitions().len(), 1);
    }

    #[test]
    fn missing_init_is_located() {
        let e = parse_protocol("protocol t\nstates a b\nfinal b\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        assert!(e.message.contains("init"), "{e}");
    }

    #[test]
    fn undeclared_message() {
        let e = parse_protocol("protocol t\nstates q p\ninit q\nfinal p\nmessages a\ntrans q !x p\n").unwrap_err();
        assert_eq!((e.line, e.column), (6, 9));
        assert!(e.message.contains("unknown message `x`"));
    }

    #[test]
    fn duplicate_trans_is_idempotent() {
        let p = parse_protocol("protocol t\nstates q p\ninit q\nfinal p\ntrans q tau p\ntrans q tau p\n").unwrap();
        assert_eq!(p.transitions().len(), 1);
    }

    #[test]
    fn config_literals() {
        let p = fixtures::fig1();
        let c = parse_config("q1:2,q4,q5", &p).unwrap();
        let id = |q| p.state_id(q).unwrap();
        assert_eq!(c, Configuration::from_counts([(id("q1"), 2), (id("q4"), 1), (id("q5"), 1)]));
        assert_eq!(parse_config("q_in", &p).unwrap(), Configuration::singleton(p.init(), 1));
        assert_eq!(parse_config("q1,q1", &p).unwrap(), Configuration::singleton(id("q1"), 2));
        assert!(parse_config("q1:0", &p).is_err());
        assert!(parse_config("", &p).is_err());
        let e = parse_config("q1, zz", &p).unwrap_err();
        assert_eq!(e.column, 5);
    }

    #[test]
    fn machine_round_trip() {
        let text = "machine m\nlocations a b\ninit a\ncounters x y\nrestore on\ntrans a inc x b\ntrans b nbdec y a\ntrans a zero? y a\ntrans b nop b\n";
        let m = parse_machine(text).unwrap();
        assert!(m.restore());
        assert_eq!(m.transitions()[2].op, CounterOp::ZeroTest(1));
        assert_eq!(write_machine(&m), text);
        assert_eq!(parse_machine(&write_machine(&m)).unwrap(), m);
        let e = parse_machine("machine m\nlocations a\ninit a\ncounters x\ntrans a inc z a\n").unwrap_err();
        assert_eq!((e.line, e.column), (5, 13));
    }

    #[test]
    fn vas_round_trip() {
        let text = "vas v dim 2\ninit 1 0\ntarget 0 1\ntrans -1 1 ; 0 2\n";
        let v = parse_vas(text).unwrap();
        assert_eq!(v.transitions[0].block, vec![-1, 1]);
        assert_eq!(write_vas(&v), text);
        assert!(parse_vas("vas v dim 2\ninit 1 0\ntarget 0 1\ntrans -1 1 ; 0 -2\n").is_err());
        assert!(parse_vas("vas v dim 2\ninit 1\ntarget 0 1\n").is_err());
    }
}

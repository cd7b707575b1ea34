//! Text formats: edge-list network files, extended Newick and CPS files.
//!
//! The edge list is the canonical format. Each non-comment line is
//! `parent child [multiplicity]`; `#` starts a comment; names appearing only
//! as children become taxa. Extended Newick is interchange-only, with
//! `#H<k>` hybrid tags merged into reticulation nodes. CPS files hold one
//! pair per line as `x y` or `x,y`.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::network::{Network, NetworkError, NodeId, NodeKind};
use crate::sequence::{Pair, Sequence};

/// Characters that can never occur in a taxon or node name, so that every
/// name survives both file formats.
const FORBIDDEN: [char; 5] = ['#', '(', ')', ',', ';'];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("offset {pos}: {msg}")]
    Newick { pos: usize, msg: String },
    #[error(transparent)]
    Net(#[from] NetworkError),
}

impl IoError {
    fn at_line(line: usize, msg: impl Into<String>) -> Self {
        IoError::Syntax { line, msg: msg.into() }
    }

    fn at_pos(pos: usize, msg: impl Into<String>) -> Self {
        IoError::Newick { pos, msg: msg.into() }
    }
}

/// What [`parse_network`] had to normalize.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// A root edge was added above a source with outdegree above 1.
    pub root_inserted: bool,
    /// Number of edge lines that merged into an earlier line's entry.
    pub merged_edges: usize,
}

fn check_name(line: usize, token: &str) -> Result<(), IoError> {
    if let Some(c) = token.chars().find(|c| FORBIDDEN.contains(c)) {
        return Err(IoError::at_line(line, format!("character {c:?} is not allowed in name {token:?}")));
    }
    Ok(())
}

/// Parses an edge-list network. Returns the network together with a report
/// of any normalization applied.
pub fn parse_network(text: &str) -> Result<(Network, ParseReport), IoError> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut mult: HashMap<(String, String), u32> = HashMap::new();
    let mut report = ParseReport::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let (u, v, m) = match tokens.as_slice() {
            [u, v] => (*u, *v, 1),
            [u, v, m] => {
                let m: u32 = m.parse().map_err(|_| {
                    IoError::at_line(line, format!("multiplicity {m:?} is not a positive integer"))
                })?;
                if m == 0 {
                    return Err(IoError::at_line(line, "multiplicity must be at least 1"));
                }
                (*u, *v, m)
            }
            _ => {
                return Err(IoError::at_line(
                    line,
                    format!("expected `parent child [multiplicity]`, got {} tokens", tokens.len()),
                ))
            }
        };
        check_name(line, u)?;
        check_name(line, v)?;
        let key = (u.to_owned(), v.to_owned());
        match mult.get_mut(&key) {
            Some(total) => {
                *total += m;
                report.merged_edges += 1;
            }
            None => {
                mult.insert(key.clone(), m);
                order.push(key);
            }
        }
    }
    if order.is_empty() {
        return Err(IoError::at_line(1, "no edges in input"));
    }

    let mut edges: Vec<(String, String, u32)> = order
        .into_iter()
        .map(|key| {
            let m = mult[&key];
            (key.0, key.1, m)
        })
        .collect();

    // a source with outdegree above 1 gets a fresh root above it, so that
    // inputs written as bare trees still parse
    let mut indeg: HashMap<&str, u32> = HashMap::new();
    let mut outdeg: HashMap<&str, u32> = HashMap::new();
    for (u, v, m) in &edges {
        *outdeg.entry(u).or_insert(0) += m;
        *indeg.entry(v).or_insert(0) += m;
        indeg.entry(u).or_insert(0);
        outdeg.entry(v).or_insert(0);
    }
    let sources: Vec<&str> = indeg.iter().filter(|&(_, &d)| d == 0).map(|(&n, _)| n).collect();
    if let [source] = sources.as_slice() {
        if outdeg[source] > 1 {
            let names: HashSet<&str> = indeg.keys().copied().collect();
            let mut aux = "root".to_owned();
            let mut k = 0;
            while names.contains(aux.as_str()) {
                k += 1;
                aux = format!("root{k}");
            }
            let source = (*source).to_owned();
            edges.insert(0, (aux, source, 1));
            report.root_inserted = true;
        }
    }

    let net = Network::from_edges(&edges)?;
    Ok((net, report))
}

/// Serialization format for [`write_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetFormat {
    EdgeList,
    Enewick,
}

/// Writes a network deterministically. Edge-list output names the root
/// `root` and internal nodes `i0`, `i1`, ... in id order, avoiding clashes
/// with taxa; extended Newick numbers hybrid tags in visit order.
pub fn write_network(net: &Network, format: NetFormat) -> String {
    match format {
        NetFormat::EdgeList => write_edge_list(net),
        NetFormat::Enewick => write_enewick(net),
    }
}

fn write_edge_list(net: &Network) -> String {
    let taxa: HashSet<String> = net.taxa().into_iter().collect();
    let mut names: HashMap<NodeId, String> = HashMap::new();
    let mut counter = 0usize;
    for v in net.node_ids() {
        if let Some(l) = net.label(v) {
            names.insert(v, l.to_owned());
        } else if v == net.root() {
            let mut name = "root".to_owned();
            let mut k = 0;
            while taxa.contains(&name) {
                k += 1;
                name = format!("root{k}");
            }
            names.insert(v, name);
        } else {
            let mut name = format!("i{counter}");
            counter += 1;
            while taxa.contains(&name) {
                name = format!("i{counter}");
                counter += 1;
            }
            names.insert(v, name);
        }
    }
    let mut out = String::new();
    for (u, v, m) in net.edges() {
        out.push_str(&names[&u]);
        out.push(' ');
        out.push_str(&names[&v]);
        if m > 1 {
            out.push(' ');
            out.push_str(&m.to_string());
        }
        out.push('\n');
    }
    out
}

fn write_enewick(net: &Network) -> String {
    fn render(
        net: &Network,
        v: NodeId,
        tags: &mut HashMap<NodeId, usize>,
        next_tag: &mut usize,
        out: &mut String,
    ) {
        match net.kind(v) {
            NodeKind::Leaf => out.push_str(net.label(v).expect("leaf is labeled")),
            NodeKind::Reticulation => {
                if let Some(&k) = tags.get(&v) {
                    out.push_str(&format!("#H{k}"));
                } else {
                    let k = *next_tag;
                    *next_tag += 1;
                    tags.insert(v, k);
                    out.push('(');
                    let child = net.children(v)[0].0;
                    render(net, child, tags, next_tag, out);
                    out.push(')');
                    out.push_str(&format!("#H{k}"));
                }
            }
            NodeKind::Root | NodeKind::TreeNode => {
                out.push('(');
                let mut first = true;
                for &(c, m) in net.children(v) {
                    for _ in 0..m {
                        if !first {
                            out.push(',');
                        }
                        first = false;
                        render(net, c, tags, next_tag, out);
                    }
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    let mut tags = HashMap::new();
    let mut next_tag = 1usize;
    out.push('(');
    let top = net.children(net.root())[0].0;
    render(net, top, &mut tags, &mut next_tag, &mut out);
    out.push_str(");");
    out
}

struct NewickParser<'a> {
    src: &'a str,
    pos: usize,
    net: Network,
    hybrids: HashMap<String, NodeId>,
    defined: HashSet<String>,
}

impl<'a> NewickParser<'a> {
    fn new(src: &'a str) -> Self {
        NewickParser {
            src,
            pos: 0,
            net: Network::new(),
            hybrids: HashMap::new(),
            defined: HashSet::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
    }

    fn name(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| !c.is_whitespace() && !FORBIDDEN.contains(&c))
        {
            self.bump();
        }
        if self.pos > start {
            Some(&self.src[start..self.pos])
        } else {
            None
        }
    }

    fn hybrid_ref(&mut self) -> Result<(String, NodeId), IoError> {
        let pos = self.pos;
        self.bump();
        let Some(tag) = self.name() else {
            return Err(IoError::at_pos(pos, "expected a hybrid tag after #"));
        };
        let id = match self.hybrids.get(tag) {
            Some(&id) => id,
            None => {
                let id = self.net.add_node(None).map_err(IoError::Net)?;
                self.hybrids.insert(tag.to_owned(), id);
                id
            }
        };
        Ok((tag.to_owned(), id))
    }

    /// Closes a group: attaches `children` either to the hybrid node named
    /// right after the closing parenthesis, or to a fresh internal node.
    fn close_group(&mut self, children: Vec<NodeId>) -> Result<NodeId, IoError> {
        let _internal_name = self.name();
        let v = if self.peek() == Some('#') {
            let pos = self.pos;
            let (tag, v) = self.hybrid_ref()?;
            if !self.defined.insert(tag.clone()) {
                return Err(IoError::at_pos(pos, format!("hybrid tag #{tag} defined more than once")));
            }
            v
        } else {
            self.net.add_node(None).map_err(IoError::Net)?
        };
        for c in children {
            if c == v {
                return Err(IoError::at_pos(self.pos, "hybrid tag appears inside its own subtree"));
            }
            self.net.add_edge(v, c, 1);
        }
        Ok(v)
    }

    /// Iterative subtree parser; the explicit stack holds the children lists
    /// of the groups currently open, so arbitrarily deep input cannot
    /// overflow the call stack.
    fn top_subtree(&mut self) -> Result<NodeId, IoError> {
        let mut stack: Vec<Vec<NodeId>> = Vec::new();
        loop {
            self.skip_ws();
            let mut node = match self.peek() {
                Some('(') => {
                    self.bump();
                    stack.push(Vec::new());
                    continue;
                }
                Some('#') => self.hybrid_ref()?.1,
                _ => {
                    let pos = self.pos;
                    let Some(label) = self.name() else {
                        return Err(IoError::at_pos(pos, "expected a subtree"));
                    };
                    if self.peek() == Some('#') {
                        return Err(IoError::at_pos(
                            self.pos,
                            format!("hybrid tag after leaf name {label:?}; write ({label})#Hk instead"),
                        ));
                    }
                    self.net.add_node(Some(label.to_owned())).map_err(IoError::Net)?
                }
            };
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(',') if !stack.is_empty() => {
                        self.bump();
                        stack.last_mut().expect("nonempty").push(node);
                        break;
                    }
                    Some(')') if !stack.is_empty() => {
                        self.bump();
                        let mut children = stack.pop().expect("nonempty");
                        children.push(node);
                        node = self.close_group(children)?;
                    }
                    _ if stack.is_empty() => return Ok(node),
                    _ => return Err(IoError::at_pos(self.pos, "expected `,` or `)`")),
                }
            }
        }
    }
}

/// Parses a rooted extended Newick string into a network. Repeated `#H<k>`
/// tags under one parent become parallel edges; every tag must be given a
/// subtree exactly once.
pub fn parse_enewick(text: &str) -> Result<Network, IoError> {
    let mut p = NewickParser::new(text);
    let top = p.top_subtree()?;
    p.skip_ws();
    if p.peek() != Some(';') {
        return Err(IoError::at_pos(p.pos, "expected `;`"));
    }
    p.bump();
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(IoError::at_pos(p.pos, format!("unexpected {c:?} after `;`")));
    }
    for tag in p.hybrids.keys() {
        if !p.defined.contains(tag) {
            return Err(IoError::at_pos(
                p.src.len(),
                format!("hybrid tag #{tag} was never given a subtree"),
            ));
        }
    }
    let mut net = p.net;
    match net.outdegree(top) {
        0 => {
            return Err(IoError::at_pos(
                0,
                "a single leaf is not a network; write (leaf); to add a root",
            ))
        }
        1 => net.set_root(top),
        _ => {
            let root = net.add_node(None).map_err(IoError::Net)?;
            net.add_edge(root, top, 1);
            net.set_root(root);
        }
    }
    net.validate().map_err(IoError::Net)?;
    Ok(net)
}

/// Parses a CPS file: one pair per line, `x y` or `x,y`, comments with `#`.
/// Validity as a CPS is not checked here; see `check_cps`.
pub fn parse_cps(text: &str) -> Result<Sequence, IoError> {
    let mut seq = Sequence::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        match tokens.as_slice() {
            [] => continue,
            [x, y] => {
                check_name(line, x)?;
                check_name(line, y)?;
                let pair = Pair::new(*x, *y)
                    .map_err(|e| IoError::at_line(line, e.to_string()))?;
                seq.push(pair);
            }
            _ => {
                return Err(IoError::at_line(
                    line,
                    format!("expected two taxa per line, got {}", tokens.len()),
                ))
            }
        }
    }
    Ok(seq)
}

/// Writes a sequence as one `x y` line per pair. Round-trips exactly through
/// [`parse_cps`].
pub fn write_cps(seq: &Sequence) -> String {
    let mut out = String::new();
    for p in seq.iter() {
        out.push_str(p.first());
        out.push(' ');
        out.push_str(p.second());
        out.push('\n');
    }
    out
}

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Graph and community export formats.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cliques::{Community, LexicalGraph};
use crate::corpus::CorpusStore;
use crate::error::Result;
use crate::fields::growth_color;
use crate::macromap::MacroMap;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

const GRAPHML_HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">
"#;

/// `term_a,term_b` edge list, one row per undirected edge.
pub fn graph_edge_csv(g: &LexicalGraph, store: &CorpusStore) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["term_a", "term_b"]).map_err(std::io::Error::from)?;
    for (a, b) in g.edges() {
        w.write_record([store.label(a), store.label(b)])
            .map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("labels are UTF-8"))
}

pub fn graph_graphml(g: &LexicalGraph, store: &CorpusStore) -> String {
    let mut s = String::from(GRAPHML_HEADER);
    s.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <graph id=\"lexical\" edgedefault=\"undirected\">\n");
    for n in g.nodes() {
        let _ = writeln!(
            s,
            "    <node id=\"t{}\"><data key=\"label\">{}</data></node>",
            n.0,
            xml_escape(store.label(n))
        );
    }
    for (a, b) in g.edges() {
        let _ = writeln!(s, "    <edge source=\"t{}\" target=\"t{}\"/>", a.0, b.0);
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

#[derive(Serialize)]
struct CommunityDoc<'a> {
    id: usize,
    members: Vec<&'a str>,
}

#[derive(Serialize)]
struct CommunitiesDoc<'a> {
    communities: Vec<CommunityDoc<'a>>,
}

/// `{communities: [{id, members: [labels...]}]}`.
pub fn communities_json(communities: &[Community], store: &CorpusStore) -> Result<String> {
    let doc = CommunitiesDoc {
        communities: communities
            .iter()
            .map(|c| CommunityDoc {
                id: c.id,
                members: c.members.iter().map(|&m| store.label(m)).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn macro_graphml(map: &MacroMap) -> String {
    let mut s = String::from(GRAPHML_HEADER);
    s.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"size_display\" for=\"node\" attr.name=\"size_display\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"activity\" for=\"node\" attr.name=\"activity\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    s.push_str("  <graph id=\"macro\" edgedefault=\"undirected\">\n");
    for n in &map.nodes {
        let _ = write!(
            s,
            "    <node id=\"f{}\"><data key=\"label\">{}</data><data key=\"size_display\">{}</data>",
            n.field_id,
            xml_escape(&n.label),
            n.size_display
        );
        if let Some(a) = n.activity {
            let _ = write!(s, "<data key=\"activity\">{a}</data>");
        }
        s.push_str("</node>\n");
    }
    for e in &map.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"f{}\" target=\"f{}\"><data key=\"weight\">{}</data></edge>",
            e.field_a, e.field_b, e.weight
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

/// DOT with `width` from display size, `fillcolor` from activity and
/// `penwidth`/`weight` from the shared-term count. Fields with undefined
/// activity get a dashed outline.
pub fn macro_dot(map: &MacroMap) -> String {
    let mut s = String::from("graph macromap {\n  node [shape=circle, style=filled, fixedsize=true];\n");
    for n in &map.nodes {
        let style = if n.activity.is_some() {
            ""
        } else {
            ", style=\"filled,dashed\""
        };
        let _ = writeln!(
            s,
            "  f{} [label=\"{}\", width={:.4}, fillcolor=\"{}\"{}];",
            n.field_id,
            dot_escape(&n.label),
            n.size_display,
            growth_color(n.activity),
            style
        );
    }
    for e in &map.edges {
        let _ = writeln!(
            s,
            "  f{} -- f{} [weight={}, penwidth={}];",
            e.field_a, e.field_b, e.weight, e.weight
        );
    }
    s.push_str("}\n");
    s
}

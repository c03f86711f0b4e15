//! On-disk formats: the plain-text graph file, partition JSON, coalition
//! and leader CSVs, vote writers and report tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    CoalitionMap, CompositionRow, ImbalanceReport, LeaderMap, LeadershipRow, LoyaltyRow, MediationVerdict,
    PolarizationSummary,
};
use crate::error::{Error, Result};
use crate::extract::{Proposition, VoteRow, VOTE_COLUMNS};
use crate::graph::{Edge, SignedGraph, Vertex};
use crate::imbalance::BlockSign;
use crate::partition::Partition;
use crate::vote::{Deputy, VoteRecord};

// ------------------------------------------------------------------- graph

fn check_token(kind: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        return Err(Error::InvalidGraph(format!(
            "{kind} `{value}` cannot be written: empty or contains whitespace"
        )));
    }
    Ok(())
}

/// `n m`, then `index id party state` per vertex, then `u v weight` per
/// edge with six decimals.
pub fn write_graph(graph: &SignedGraph) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{} {}", graph.vertex_count(), graph.edge_count()).unwrap();
    for (i, v) in graph.vertices().iter().enumerate() {
        check_token("vertex id", &v.id)?;
        check_token("party", &v.party)?;
        check_token("state", &v.state)?;
        writeln!(out, "{i} {} {} {}", v.id, v.party, v.state).unwrap();
    }
    for e in graph.edges() {
        writeln!(out, "{} {} {:.6}", e.u, e.v, e.weight).unwrap();
    }
    Ok(out)
}

pub fn read_graph<R: Read>(mut input: R) -> Result<SignedGraph> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::parse(0, format!("graph file is not UTF-8 text: {e}")))?;
    parse_graph(&text)
}

pub fn parse_graph(text: &str) -> Result<SignedGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "empty graph file"))?;
    let header: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = header.as_slice() else {
        return Err(Error::parse(line, "expected `n m` header"));
    };
    let n: usize = n.parse().map_err(|_| Error::parse(line, format!("bad vertex count `{n}`")))?;
    let m: usize = m.parse().map_err(|_| Error::parse(line, format!("bad edge count `{m}`")))?;

    let mut vertices = Vec::with_capacity(n);
    for expected in 0..n {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("expected {n} vertex lines, found {expected}")))?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [index, id, party, state] = fields.as_slice() else {
            return Err(Error::parse(line, "expected `index deputy_id party state`"));
        };
        if index.parse::<usize>().ok() != Some(expected) {
            return Err(Error::parse(line, format!("expected vertex index {expected}, found `{index}`")));
        }
        vertices.push(Vertex::new(*id, *party, *state));
    }

    let mut edges = Vec::with_capacity(m);
    for found in 0..m {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("expected {m} edge lines, found {found}")))?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [u, v, w] = fields.as_slice() else {
            return Err(Error::parse(line, "expected `u v weight`"));
        };
        let u: usize = u.parse().map_err(|_| Error::parse(line, format!("bad vertex index `{u}`")))?;
        let v: usize = v.parse().map_err(|_| Error::parse(line, format!("bad vertex index `{v}`")))?;
        let weight: f64 = w.parse().map_err(|_| Error::parse(line, format!("bad weight `{w}`")))?;
        if u >= v {
            return Err(Error::parse(line, format!("edge ({u}, {v}) must have u < v")));
        }
        edges.push(Edge { u, v, weight });
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing content after the last edge"));
    }
    SignedGraph::new(vertices, edges)
}

// --------------------------------------------------------------- partition

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub k: usize,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_ids: Option<Vec<String>>,
}

impl PartitionFile {
    pub fn new(partition: &Partition, graph: Option<&SignedGraph>) -> Self {
        Self {
            k: partition.k(),
            labels: partition.labels().to_vec(),
            vertex_ids: graph.map(|g| g.vertices().iter().map(|v| v.id.clone()).collect()),
        }
    }

    /// The partition, checked against `graph` when one is given.
    pub fn into_partition(self, graph: Option<&SignedGraph>) -> Result<Partition> {
        if let (Some(graph), Some(ids)) = (graph, &self.vertex_ids) {
            let matches = ids.len() == graph.vertex_count()
                && ids.iter().zip(graph.vertices()).all(|(id, v)| *id == v.id);
            if !matches {
                return Err(Error::InvalidPartition(
                    "partition vertex ids do not match the graph's vertices".into(),
                ));
            }
        }
        let partition = Partition::new(self.labels, self.k)?;
        if let Some(graph) = graph {
            if partition.len() != graph.vertex_count() {
                return Err(Error::InvalidPartition(format!(
                    "{} labels for a graph with {} vertices",
                    partition.len(),
                    graph.vertex_count()
                )));
            }
        }
        Ok(partition)
    }
}

pub fn write_partition(partition: &Partition, graph: Option<&SignedGraph>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PartitionFile::new(partition, graph))? + "\n")
}

pub fn read_partition<R: Read>(input: R, graph: Option<&SignedGraph>) -> Result<Partition> {
    let file: PartitionFile = serde_json::from_reader(input)?;
    file.into_partition(graph)
}

// --------------------------------------------------------------- metadata

fn read_pairs<R: Read>(input: R, columns: [&str; 2]) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))
    };
    let (a, b) = (position(columns[0])?, position(columns[1])?);
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let key = record.get(a).unwrap_or_default().to_string();
        let value = record.get(b).unwrap_or_default().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::parse(line, "empty field"));
        }
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(Error::parse(line, format!("`{key}` already listed on line {first}")));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

/// CSV with header `party,alliance`.
pub fn read_coalitions<R: Read>(input: R) -> Result<CoalitionMap> {
    Ok(CoalitionMap::new(read_pairs(input, ["party", "alliance"])?))
}

/// CSV with header `party,leader_deputy_id`.
pub fn read_leaders<R: Read>(input: R) -> Result<LeaderMap> {
    Ok(LeaderMap::new(read_pairs(input, ["party", "leader_deputy_id"])?))
}

// ------------------------------------------------------------------- votes

/// Input rows for `records`, with Portuguese vote tokens and the
/// proposition date when known.
pub fn vote_rows(deputies: &[Deputy], records: &[VoteRecord], propositions: &[Proposition]) -> Result<Vec<VoteRow>> {
    let by_id: HashMap<&str, &Deputy> = deputies.iter().map(|d| (d.id.as_str(), d)).collect();
    let dates: HashMap<&str, String> = propositions
        .iter()
        .filter_map(|p| p.date.map(|d| (p.id.as_str(), d.format("%Y-%m-%d").to_string())))
        .collect();
    records
        .iter()
        .map(|r| {
            let d = by_id
                .get(r.deputy_id.as_str())
                .ok_or_else(|| Error::Metadata(format!("deputy `{}` missing from the roster", r.deputy_id)))?;
            Ok(VoteRow {
                proposition_id: r.proposition_id.clone(),
                deputy_id: d.id.clone(),
                deputy_name: d.name.clone(),
                party: d.party.clone(),
                state: d.state.clone(),
                vote: r.vote.portuguese().to_string(),
                date: dates.get(r.proposition_id.as_str()).cloned(),
            })
        })
        .collect()
}

/// Vote CSV; a trailing `date` column is added when any row carries one.
pub fn write_vote_csv<W: Write>(output: W, rows: &[VoteRow]) -> Result<()> {
    let dated = rows.iter().any(|r| r.date.is_some());
    let mut writer = csv::Writer::from_writer(output);
    let mut header: Vec<&str> = VOTE_COLUMNS.to_vec();
    if dated {
        header.push("date");
    }
    writer.write_record(&header)?;
    for r in rows {
        let mut record = vec![
            r.proposition_id.as_str(),
            &r.deputy_id,
            &r.deputy_name,
            &r.party,
            &r.state,
            &r.vote,
        ];
        if dated {
            record.push(r.date.as_deref().unwrap_or(""));
        }
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("vote csv", e))?;
    Ok(())
}

pub fn write_vote_json<W: Write>(output: W, rows: &[VoteRow]) -> Result<()> {
    serde_json::to_writer_pretty(output, rows)?;
    Ok(())
}

// ----------------------------------------------------------------- reports

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::io("report csv", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn cluster_name(c: usize) -> String {
    format!("C{}", c + 1)
}

pub fn mediation_csv(rows: &[MediationVerdict]) -> Result<String> {
    csv_string(
        &strings(&["cluster", "external_positive_ratio", "internal_positive_ratio", "is_mediator"]),
        rows.iter().map(|r| {
            vec![
                r.cluster.to_string(),
                fixed(r.external_positive_ratio),
                fixed(r.internal_positive_ratio),
                r.is_mediator.to_string(),
            ]
        }),
    )
}

/// Columns `alliance,party,deputies,C1..Ck,plurality,alliance_cluster,unfaithful`;
/// percentages have two decimals.
pub fn loyalty_csv(rows: &[LoyaltyRow], k: usize) -> Result<String> {
    let mut header = strings(&["alliance", "party", "deputies"]);
    header.extend((0..k).map(cluster_name));
    header.extend(strings(&["plurality", "alliance_cluster", "unfaithful"]));
    csv_string(
        &header,
        rows.iter().map(|r| {
            let mut row = vec![r.alliance.clone(), r.party.clone(), r.deputies.to_string()];
            row.extend(r.percentages.iter().map(|p| format!("{p:.2}")));
            row.push(cluster_name(r.plurality_cluster));
            row.push(cluster_name(r.alliance_cluster));
            row.push(r.unfaithful.to_string());
            row
        }),
    )
}

pub fn leadership_csv(rows: &[LeadershipRow]) -> Result<String> {
    csv_string(
        &strings(&["party", "leader_deputy_id", "deputies", "percentage", "weak"]),
        rows.iter().map(|r| {
            vec![
                r.party.clone(),
                r.leader_id.clone(),
                r.deputies.to_string(),
                format!("{:.2}", r.percentage),
                r.weak.to_string(),
            ]
        }),
    )
}

pub fn composition_csv(rows: &[CompositionRow]) -> Result<String> {
    csv_string(
        &strings(&["cluster", "party", "count"]),
        rows.iter()
            .map(|r| vec![r.cluster.to_string(), r.party.clone(), r.count.to_string()]),
    )
}

pub fn polarization_csv(summary: &PolarizationSummary) -> Result<String> {
    csv_string(
        &strings(&["cluster", "size", "dominant_alliance", "dominance_share"]),
        summary.rows.iter().map(|r| {
            vec![
                r.cluster.to_string(),
                r.size.to_string(),
                r.dominant_alliance.clone(),
                fixed(r.dominance_share),
            ]
        }),
    )
}

/// One row per block plus a final `total` row carrying %SRI.
pub fn imbalance_csv(report: &ImbalanceReport) -> Result<String> {
    let mut rows: Vec<Vec<String>> = report
        .blocks
        .iter()
        .map(|b| {
            vec![
                b.cluster_a.to_string(),
                b.cluster_b.to_string(),
                fixed(b.pos),
                fixed(b.neg),
                match b.sign {
                    Some(BlockSign::Positive) => "positive".into(),
                    Some(BlockSign::Negative) => "negative".into(),
                    None => String::new(),
                },
                fixed(b.contribution),
            ]
        })
        .collect();
    rows.push(vec![
        "total".into(),
        String::new(),
        String::new(),
        String::new(),
        format!("{:.6}%", report.percentage),
        fixed(report.total),
    ]);
    csv_string(
        &strings(&["cluster_a", "cluster_b", "positive", "negative", "sign", "contribution"]),
        rows,
    )
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SignedGraph {
        let vertices = vec![
            Vertex::new("a1", "PT", "SP"),
            Vertex::new("a2", "PT", "RJ"),
            Vertex::new("b1", "PSDB", "MG"),
        ];
        let edges = [
            Edge { u: 0, v: 1, weight: 0.75 },
            Edge { u: 0, v: 2, weight: -0.5 },
            Edge { u: 1, v: 2, weight: -0.125 },
        ];
        SignedGraph::new(vertices, edges).unwrap()
    }

    #[test]
    fn graph_text_layout() {
        let text = write_graph(&sample()).unwrap();
        assert_eq!(
            text,
            "3 3\n0 a1 PT SP\n1 a2 PT RJ\n2 b1 PSDB MG\n0 1 0.750000\n0 2 -0.500000\n1 2 -0.125000\n"
        );
        assert_eq!(parse_graph(&text).unwrap(), sample());
    }

    #[test]
    fn graph_reader_rejects_malformed_input() {
        for bad in [
            "",
            "2\n",
            "2 0\n0 a P S\n",
            "2 0\n0 a P S\n2 b P S\n",
            "2 1\n0 a P S\n1 b P S\n1 0 0.5\n",
            "2 1\n0 a P S\n1 b P S\n0 1 zero\n",
            "2 1\n0 a P S\n1 b P S\n0 1 0.5\n0 1 0.5\n",
            "2 0\n0 a P S\n1 a P S\n",
        ] {
            assert!(parse_graph(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn graph_writer_rejects_spaces() {
        let g = SignedGraph::new(vec![Vertex::new("a b", "P", "S")], []).unwrap();
        assert!(write_graph(&g).is_err());
    }

    #[test]
    fn partition_round_trip_checks_ids() {
        let g = sample();
        let p = Partition::from_labels(&[0, 0, 1]).unwrap();
        let text = write_partition(&p, Some(&g)).unwrap();
        assert_eq!(read_partition(text.as_bytes(), Some(&g)).unwrap(), p);

        let other = SignedGraph::new(
            vec![Vertex::new("x", "P", "S"), Vertex::new("y", "P", "S"), Vertex::new("z", "P", "S")],
            [],
        )
        .unwrap();
        assert!(read_partition(text.as_bytes(), Some(&other)).is_err());
        assert!(read_partition(r#"{"k":2,"labels":[0,0,0]}"#.as_bytes(), None).is_err());
    }

    #[test]
    fn metadata_csvs() {
        let c = read_coalitions("party,alliance\nPT, GOVERNMENT\nPSDB,OPPOSITION\n".as_bytes()).unwrap();
        assert_eq!(c.alliance_of("PT").unwrap(), "GOVERNMENT");
        assert!(read_coalitions("party,alliance\nPT,A\nPT,B\n".as_bytes()).is_err());
        assert!(read_coalitions("party,bloc\nPT,A\n".as_bytes()).is_err());
        let l = read_leaders("party,leader_deputy_id\nPT,a1\n".as_bytes()).unwrap();
        assert_eq!(l.leaders["PT"], "a1");
    }

    #[test]
    fn vote_csv_round_trip() {
        use crate::extract::{parse_vote_records, InputFormat};
        let rows = vec![VoteRow {
            proposition_id: "p1".into(),
            deputy_id: "d1".into(),
            deputy_name: "Silva, Ana".into(),
            party: "PT".into(),
            state: "SP".into(),
            vote: "Não".into(),
            date: Some("2014-03-02".into()),
        }];
        let mut buf = Vec::new();
        write_vote_csv(&mut buf, &rows).unwrap();
        let data = parse_vote_records(buf.as_slice(), InputFormat::Csv).unwrap();
        assert_eq!(data.deputies[0].name, "Silva, Ana");
        assert_eq!(data.propositions[0].year(), Some(2014));
        assert_eq!(vote_rows(&data.deputies, &data.records, &data.propositions).unwrap(), rows);
    }
}

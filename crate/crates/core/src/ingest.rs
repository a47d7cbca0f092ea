//! Senate co-voting networks built from roll-call records.
//!
//! Input is one CSV file per Congress with a header row and one row per
//! senator per bill:
//!
//! ```text
//! congress,senator_id,name,party,bill,vote
//! 104,49703,"DOLE, Robert",200,1,1
//! ```
//!
//! `party` accepts `100`, `D` or `Democrat` and `200`, `R` or `Republican`
//! (case-insensitive); anything else is kept as another party. `vote` codes:
//!
//! | code | meaning |
//! |------|---------|
//! | `1` `2` `3` `yea` `yay` `y` | Yay (yea, paired yea, announced yea) |
//! | `4` `5` `6` `nay` `no` `n` | Nay (announced nay, paired nay, nay) |
//! | `0` `7` `8` `9` `abstain` `absent` `present` `nv` | Abstain |
//!
//! The numeric codes follow the public Voteview member-vote files, so those
//! can be converted by joining the vote file with the member file on
//! `icpsr` and renaming columns (`icpsr` to `senator_id`, `bioname` to
//! `name`, `party_code` to `party`, `rollnumber` to `bill`, `cast_code` to
//! `vote`). A senator with no row for a bill is treated as abstaining.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{CommunityAssignment, WeightedGraph};
use crate::surveillance::{stat_vector, StatVector};

pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Party {
    Democrat,
    Republican,
    Other(String),
}

impl Party {
    pub fn parse(code: &str) -> Self {
        match code.trim().to_ascii_lowercase().as_str() {
            "100" | "d" | "democrat" | "democratic" => Party::Democrat,
            "200" | "r" | "republican" => Party::Republican,
            other => Party::Other(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Yay,
    Nay,
    Abstain,
}

impl Vote {
    pub fn parse(code: &str) -> Option<Self> {
        match code.trim().to_ascii_lowercase().as_str() {
            "1" | "2" | "3" | "yea" | "yay" | "y" => Some(Vote::Yay),
            "4" | "5" | "6" | "nay" | "no" | "n" => Some(Vote::Nay),
            "0" | "7" | "8" | "9" | "abstain" | "absent" | "present" | "nv" => Some(Vote::Abstain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Senator {
    pub id: String,
    pub name: String,
    pub party: Party,
}

/// Votes of one Congress: `votes[i][j]` is senator `i` on bill `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RollCall {
    pub congress: String,
    pub senators: Vec<Senator>,
    pub bills: Vec<String>,
    pub votes: Vec<Vec<Vote>>,
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

/// Parses one Congress. Senators and bills keep their order of first appearance.
pub fn parse_rollcall<R: Read>(reader: R) -> Result<RollCall> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let expected = ["congress", "senator_id", "name", "party", "bill", "vote"];
    let index: Vec<usize> = expected
        .iter()
        .map(|col| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(col))
                .ok_or_else(|| Error::parse(1, format!("missing column `{col}`")))
        })
        .collect::<Result<_>>()?;

    let mut congress: Option<String> = None;
    let mut senators: Vec<Senator> = Vec::new();
    let mut senator_index: HashMap<String, usize> = HashMap::new();
    let mut bills: Vec<String> = Vec::new();
    let mut bill_index: HashMap<String, usize> = HashMap::new();
    let mut cast: BTreeMap<(usize, usize), Vote> = BTreeMap::new();

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(index[i]).unwrap_or("");
        let c = field(0);
        match &congress {
            None => congress = Some(c.to_owned()),
            Some(prev) if prev != c => {
                return Err(Error::parse(
                    line,
                    format!("congress `{c}` differs from `{prev}`"),
                ));
            }
            Some(_) => {}
        }
        let id = field(1);
        if id.is_empty() {
            return Err(Error::parse(line, "empty senator id"));
        }
        let senator = Senator {
            id: id.to_owned(),
            name: field(2).to_owned(),
            party: Party::parse(field(3)),
        };
        let s = match senator_index.get(id) {
            Some(&s) => {
                if senators[s] != senator {
                    return Err(Error::parse(
                        line,
                        format!("senator id `{id}` reused with a different name or party"),
                    ));
                }
                s
            }
            None => {
                senator_index.insert(id.to_owned(), senators.len());
                senators.push(senator);
                senators.len() - 1
            }
        };
        let bill = field(4);
        if bill.is_empty() {
            return Err(Error::parse(line, "empty bill id"));
        }
        let b = *bill_index.entry(bill.to_owned()).or_insert_with(|| {
            bills.push(bill.to_owned());
            bills.len() - 1
        });
        let vote = Vote::parse(field(5))
            .ok_or_else(|| Error::parse(line, format!("unknown vote code `{}`", field(5))))?;
        if cast.insert((s, b), vote).is_some() {
            return Err(Error::parse(
                line,
                format!("senator `{id}` votes twice on bill `{bill}`"),
            ));
        }
    }

    let mut votes = vec![vec![Vote::Abstain; bills.len()]; senators.len()];
    for ((s, b), v) in cast {
        votes[s][b] = v;
    }
    Ok(RollCall {
        congress: congress.unwrap_or_default(),
        senators,
        bills,
        votes,
    })
}

/// Reads `senator_id,party` rows naming the party each independent caucuses with.
pub fn parse_caucus<R: Read>(reader: R) -> Result<HashMap<String, Party>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut map = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let (Some(id), Some(party)) = (record.get(0), record.get(1)) else {
            return Err(Error::parse(line, "expected `senator_id,party`"));
        };
        map.insert(id.to_owned(), Party::parse(party));
    }
    Ok(map)
}

/// Binary co-voting graph for one Congress.
#[derive(Debug, Clone)]
pub struct CovotingNetwork {
    pub graph: WeightedGraph,
    /// Democrat = community 1, Republican = community 2.
    pub labels: CommunityAssignment,
    /// Index into `RollCall::senators` of each node.
    pub senators: Vec<usize>,
    /// Ids of senators left out because their party could not be mapped.
    pub dropped: Vec<String>,
}

/// Fraction of shared participation on which two senators agreed:
/// `|A| / |U|` where `U` holds bills either voted Yay or Nay on and `A`
/// those where both cast the same Yay/Nay. `None` when `U` is empty.
pub fn concurrence(a: &[Vote], b: &[Vote]) -> Option<f64> {
    let mut union = 0usize;
    let mut agree = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x != Vote::Abstain || y != Vote::Abstain {
            union += 1;
            if x == y {
                agree += 1;
            }
        }
    }
    (union > 0).then(|| agree as f64 / union as f64)
}

/// Joins senators whose concurrence is at least `threshold`.
/// Senators outside the two major parties are mapped through `caucus`
/// when listed there and dropped otherwise.
pub fn covoting_graph(
    rc: &RollCall,
    threshold: f64,
    caucus: Option<&HashMap<String, Party>>,
) -> Result<CovotingNetwork> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let mut kept = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for (i, s) in rc.senators.iter().enumerate() {
        let party = match &s.party {
            Party::Other(_) => caucus
                .and_then(|c| c.get(&s.id))
                .cloned()
                .unwrap_or(s.party.clone()),
            p => p.clone(),
        };
        match party {
            Party::Democrat => labels.push(0),
            Party::Republican => labels.push(1),
            Party::Other(_) => {
                dropped.push(s.id.clone());
                continue;
            }
        }
        kept.push(i);
    }
    if !dropped.is_empty() {
        log::warn!(
            "congress {}: dropped {} senator(s) outside the two parties: {}",
            rc.congress,
            dropped.len(),
            dropped.join(", ")
        );
    }
    let n = kept.len();
    let mut graph = WeightedGraph::empty(n.max(1))?;
    if n == 0 {
        return Err(Error::InvalidGraph(format!(
            "congress {} has no senators to place",
            rc.congress
        )));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let ratio = concurrence(&rc.votes[kept[a]], &rc.votes[kept[b]]);
            if ratio.is_some_and(|r| r >= threshold) {
                graph.set_weight(a, b, 1)?;
            }
        }
    }
    Ok(CovotingNetwork {
        graph,
        labels: CommunityAssignment::new(labels, 2)?,
        senators: kept,
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub congress: String,
    pub senators: usize,
    pub bills: usize,
    pub edges: usize,
}

/// Co-voting graphs over consecutive Congresses. Node sets differ between
/// Congresses, so each graph carries its own labels.
#[derive(Debug, Clone)]
pub struct SenateSequence {
    pub networks: Vec<CovotingNetwork>,
    pub times: Vec<String>,
    pub summary: Vec<SummaryRow>,
}

impl SenateSequence {
    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    /// Monitoring statistics of every Congress under its party labels.
    pub fn stat_vectors(&self) -> Result<Vec<StatVector>> {
        self.networks
            .iter()
            .map(|net| stat_vector(&net.graph, &net.labels))
            .collect()
    }

    /// `congress,senators,bills,edges`.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "congress,senators,bills,edges")?;
        for r in &self.summary {
            writeln!(out, "{},{},{},{}", r.congress, r.senators, r.bills, r.edges)?;
        }
        Ok(())
    }
}

/// Builds the sequence in the order given.
pub fn senate_sequence(
    rollcalls: &[RollCall],
    threshold: f64,
    caucus: Option<&HashMap<String, Party>>,
) -> Result<SenateSequence> {
    if rollcalls.is_empty() {
        return Err(Error::InvalidParams("no roll-call records".into()));
    }
    let mut networks = Vec::with_capacity(rollcalls.len());
    let mut summary = Vec::with_capacity(rollcalls.len());
    for rc in rollcalls {
        if rc.bills.is_empty() {
            log::warn!(
                "congress {} has no bills; its graph has no edges",
                rc.congress
            );
        }
        let net = covoting_graph(rc, threshold, caucus)?;
        summary.push(SummaryRow {
            congress: rc.congress.clone(),
            senators: net.senators.len(),
            bills: rc.bills.len(),
            edges: net.graph.edge_count(),
        });
        networks.push(net);
    }
    Ok(SenateSequence {
        networks,
        times: rollcalls.iter().map(|rc| rc.congress.clone()).collect(),
        summary,
    })
}

/// Parses every `*.csv` file in `dir`, ordered by Congress (numerically
/// when the identifiers are numbers).
pub fn read_rollcall_dir(dir: &Path) -> Result<Vec<RollCall>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let file = std::fs::File::open(&path)?;
        let rc = parse_rollcall(file).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })?;
        out.push(rc);
    }
    out.sort_by(
        |a, b| match (a.congress.parse::<u64>(), b.congress.parse::<u64>()) {
            (Ok(x), Ok(y)) => x.cmp(&y),
            _ => a.congress.cmp(&b.congress),
        },
    );
    Ok(out)
}

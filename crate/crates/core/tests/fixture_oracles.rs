//! Fixture-driven oracle checks: query evaluation against an
//! independently written token-scan matcher, delineation over a small
//! store, and an end-to-end excellence map with a planted excess.

use std::collections::BTreeSet;

use estmap::geo::{excellence_map, Direction, ExcellenceConfig, Gazetteer, GeoSite};
use estmap::query::{evaluate, parse_query, Dialect, Field, QueryAst};
use estmap::record::{Affiliation, Record, RecordKind, SourceDb, Store};

fn publication(id: &str, title: &str, year: i32) -> Record {
    Record {
        id: id.into(),
        kind: RecordKind::Publication,
        source_db: SourceDb::Wos,
        title: title.into(),
        abstract_text: None,
        claims: None,
        year,
        authors: vec![],
        affiliations: vec![],
        citation_count: Some(0),
        codes: vec![],
        journal: None,
    }
}

/// Independent matcher: recursive backtracking glob over tokens, written
/// without reference to the library's two-pointer implementation.
mod oracle {
    use super::*;

    fn tokens(text: &str) -> Vec<String> {
        text.split(|c: char| !(c.is_alphanumeric() || c == '*' || c == '-'))
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    fn glob(pattern: &[char], token: &[char]) -> bool {
        match pattern.first() {
            None => token.is_empty(),
            Some('*') => (0..=token.len()).any(|k| glob(&pattern[1..], &token[k..])),
            Some(&c) => token.first() == Some(&c) && glob(&pattern[1..], &token[1..]),
        }
    }

    fn token_match(pattern: &str, token: &str) -> bool {
        let p: Vec<char> = pattern.to_lowercase().chars().collect();
        let t: Vec<char> = token.chars().collect();
        glob(&p, &t)
    }

    pub fn eval(ast: &QueryAst, record: &Record) -> bool {
        match ast {
            QueryAst::And(children) => children.iter().all(|c| eval(c, record)),
            QueryAst::Or(children) => children.iter().any(|c| eval(c, record)),
            QueryAst::Term(term) => {
                let text = match term.field {
                    Field::Title => Some(record.title.as_str()),
                    Field::Abstract => record.abstract_text.as_deref(),
                    Field::Claims => record.claims.as_deref(),
                    Field::Mesh => None,
                };
                let Some(text) = text else { return false };
                let toks = tokens(text);
                let pattern_toks = tokens(&term.pattern);
                if pattern_toks.is_empty() {
                    return false;
                }
                if term.is_phrase {
                    if pattern_toks.len() > toks.len() {
                        return false;
                    }
                    (0..=toks.len() - pattern_toks.len()).any(|start| {
                        pattern_toks
                            .iter()
                            .enumerate()
                            .all(|(k, p)| token_match(p, &toks[start + k]))
                    })
                } else {
                    toks.iter().any(|t| token_match(&term.pattern, t))
                }
            }
        }
    }
}

const HPV_QUERY: &str = "(TI=HPV* or TI=\"Human Papilloma Virus*\" or TI=\"Human Papillomavirus*\" or TI=\"Human Papilloma*virus*\") and (TI=Cervical or TI=Cervix) and (TI=diagnos* or TI=test* or TI=assay or TI=detect* or TI=screen* or TI=predict*)";

fn hpv_fixture() -> Vec<Record> {
    [
        "HPV testing in cervical cancer screening",
        "Human Papillomavirus detection in cervix samples",
        "Human Papilloma Virus assay for cervical lesions",
        "HPV16 prevalence worldwide",
        "Cervical cytology screening programmes",
        "Papillomavirus genome organization",
        "Human papillomaviruses and cervical neoplasia: a test of causality",
        "Diagnosis of cervix abnormalities by HPV DNA testing",
        "Detection of human papilloma virus in oral cancers",
        "Predicting cervical cancer risk",
        "HPV vaccination and cervical screening uptake",
        "Human Papilloma-virus typing for cervix dysplasia detection",
    ]
    .iter()
    .enumerate()
    .map(|(i, title)| publication(&format!("wos:hpv{:02}", i + 1), title, 2004))
    .collect()
}

#[test]
fn hpv_query_matches_the_token_scan_oracle() {
    let ast = parse_query(HPV_QUERY, Dialect::Wos).unwrap();
    let records = hpv_fixture();
    assert_eq!(records.len(), 12);

    let ours: BTreeSet<&str> = records
        .iter()
        .filter(|r| evaluate(&ast, r))
        .map(|r| r.id.as_str())
        .collect();
    let oracle: BTreeSet<&str> = records
        .iter()
        .filter(|r| oracle::eval(&ast, r))
        .map(|r| r.id.as_str())
        .collect();
    assert_eq!(ours, oracle, "library and oracle disagree");

    // Hand-derived expectation anchors both implementations.
    let expected: BTreeSet<&str> = [
        "wos:hpv01", "wos:hpv02", "wos:hpv03", "wos:hpv07", "wos:hpv08", "wos:hpv11",
        "wos:hpv12",
    ]
    .into();
    assert_eq!(ours, expected);
}

#[test]
fn delineation_equals_oracle_scan() {
    let query = "TI=siRNA or TI=RNAi or TI=\"RNA interference\" or TI=\"interference RNA\"";
    let ast = parse_query(query, Dialect::Wos).unwrap();
    let mut records = vec![
        publication("wos:r1", "siRNA delivery systems", 2003),
        publication("wos:r2", "RNA interference in plants", 2005),
        publication("wos:r3", "Potent genetic interference by double-stranded RNA", 1998),
        publication("wos:r4", "Therapeutic interference RNA design", 2007),
        publication("wos:r5", "microRNA profiling of tumours", 2006),
        publication("wos:r6", "RNAi screens in Drosophila", 1996), // before range
    ];
    records.push({
        let mut r = publication("medline:r7", "siRNA based silencing", 2004);
        r.source_db = SourceDb::Medline;
        r
    });
    let mut store = Store::new();
    store.upsert(records.clone());

    let corpus = estmap::query::delineate(
        &store,
        &ast,
        (1998, 2011),
        Some(SourceDb::Wos),
        "scan",
        "2013-01-15",
    );

    let oracle: BTreeSet<String> = records
        .iter()
        .filter(|r| r.source_db == SourceDb::Wos)
        .filter(|r| (1998..=2011).contains(&r.year))
        .filter(|r| oracle::eval(&ast, r))
        .map(|r| r.id.clone())
        .collect();
    assert_eq!(corpus.record_ids, oracle);
    // r3 matches no disjunct as a phrase; r5 and r6 fall out; r7 is the
    // wrong database.
    let expected: BTreeSet<String> =
        ["wos:r1", "wos:r2", "wos:r4"].iter().map(|s| s.to_string()).collect();
    assert_eq!(corpus.record_ids, expected);
}

#[test]
fn planted_excess_city_is_significant_positive() {
    let mut gazetteer = Gazetteer::default();
    gazetteer.add_site(GeoSite {
        city: "Alphaville".into(),
        country: "Nation".into(),
        lat: 10.0,
        lon: 10.0,
    });
    gazetteer.add_site(GeoSite {
        city: "Betatown".into(),
        country: "Nation".into(),
        lat: -10.0,
        lon: -10.0,
    });

    // 300 records: 60 in Alphaville with half of them highly cited, 240
    // in Betatown with a flat citation profile.
    let mut records = Vec::new();
    for i in 0..300 {
        let (city, citations) = if i < 60 {
            ("Alphaville", if i % 2 == 0 { 500 + i as u32 } else { 3 })
        } else {
            ("Betatown", (i % 5) as u32)
        };
        let mut record = publication(&format!("wos:p{i:03}"), "siRNA study", 2004);
        record.citation_count = Some(citations);
        record.affiliations = vec![Affiliation {
            raw: format!("Inst, {city}, Nation"),
            organisation: Some("Inst".into()),
            city: Some(city.into()),
            country: Some("Nation".into()),
            geocode: None,
        }];
        records.push(record);
    }
    let refs: Vec<&Record> = records.iter().collect();
    let stats = excellence_map(&refs, &gazetteer, &ExcellenceConfig::publications()).unwrap();
    let alpha = stats.iter().find(|s| s.site.city == "Alphaville").unwrap();
    let beta = stats.iter().find(|s| s.site.city == "Betatown").unwrap();

    assert_eq!(alpha.n_total, 60);
    assert!(alpha.significant, "planted excess must be significant");
    assert_eq!(alpha.direction, Direction::Positive);
    assert_eq!(beta.direction, Direction::Negative);

    // Oracle recomputation from the raw counts. The global top set is
    // rank 30 of 300 by construction: the 30 planted records all exceed
    // every other citation count, with no ties at the cutoff.
    let k = 30u32;
    let n = 300u32;
    let observed = [
        f64::from(alpha.n_top),
        f64::from(alpha.n_total - alpha.n_top),
        f64::from(k - alpha.n_top),
        f64::from(n - alpha.n_total - (k - alpha.n_top)),
    ];
    let rows = [observed[0] + observed[1], observed[2] + observed[3]];
    let cols = [observed[0] + observed[2], observed[1] + observed[3]];
    let mut chi2 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expected = rows[r] * cols[c] / f64::from(n);
            let diff = observed[r * 2 + c] - expected;
            chi2 += diff * diff / expected;
        }
    }
    assert!((alpha.chi2 - chi2).abs() < 1e-9, "{} vs {chi2}", alpha.chi2);
    assert!(chi2 > 3.841);
}

#[test]
fn fetch_reports_unknown_ids_and_continues() {
    use estmap::harvest::mock::MockServer;
    use estmap::harvest::{HarvestClient, HarvestConfig, HarvestJob};

    let server = MockServer::start(vec![
        ("medline:1".into(), "PMID- 1\nDP  - 2004\n\n".into()),
        ("medline:2".into(), "PMID- 2\nDP  - 2005\n\n".into()),
    ])
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let client = HarvestClient::new(HarvestConfig {
        endpoint: Some(server.url().to_string()),
        fixture_dir: None,
        api_key: None,
        timeout: std::time::Duration::from_secs(2),
        backoff_base: std::time::Duration::from_millis(10),
        seed: 0,
    })
    .unwrap();
    let job = HarvestJob {
        query_text: "TI=x".into(),
        source_db: SourceDb::Medline,
        page_size: 10,
        cursor_path: dir.path().join("cursor.json"),
        max_retries: 1,
        rate_limit: 500.0,
    };
    let outcome = client
        .fetch_records(
            &job,
            &["medline:1".into(), "medline:404".into(), "medline:2".into()],
        )
        .unwrap();
    assert_eq!(outcome.missing, vec!["medline:404".to_string()]);
    let text: String = outcome
        .payloads
        .iter()
        .map(|b| String::from_utf8_lossy(b).into_owned())
        .collect();
    assert!(text.contains("PMID- 1"));
    assert!(text.contains("PMID- 2"));
}

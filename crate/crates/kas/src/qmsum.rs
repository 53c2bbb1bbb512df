//! QMSum ingestion.
//!
//! Accepts a single `.json` file (one meeting object or a list of them), a
//! `.jsonl` file with one meeting per line, or a directory searched
//! recursively for both. Meeting ids come from a `meeting_id`/`id` field when
//! present, else from the file stem (suffixed with the position for files
//! holding several meetings).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use kas_core::transcript::{Query, QueryKind, Transcript};
use serde::Deserialize;
use walkdir::WalkDir;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Meeting {
    pub transcript: Transcript,
    pub queries: Vec<Query>,
}

#[derive(Debug, Deserialize)]
struct RawMeeting {
    #[serde(default)]
    meeting_id: Option<String>,
    #[serde(default)]
    id: Option<String>,
    meeting_transcripts: Vec<RawTurn>,
    #[serde(default)]
    general_query_list: Vec<RawQuery>,
    #[serde(default)]
    specific_query_list: Vec<RawQuery>,
}

#[derive(Debug, Deserialize)]
struct RawTurn {
    speaker: String,
    content: String,
}

#[derive(Debug, Deserialize)]
struct RawQuery {
    query: String,
    answer: String,
}

/// Loads every meeting under `path`, sorted by meeting id.
pub fn load_qmsum(path: &Path) -> Result<Vec<Meeting>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let mut meetings = Vec::new();
    if meta.is_dir() {
        let mut files: Vec<_> = WalkDir::new(path)
            .sort_by_file_name()
            .into_iter()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| {
                let p = e.path().unwrap_or(path).to_path_buf();
                Error::io(&p, e.into())
            })?
            .into_iter()
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "jsonl")))
            .collect();
        files.sort();
        for file in files {
            meetings.extend(load_file(&file)?);
        }
    } else {
        meetings = load_file(path)?;
    }
    let mut seen = BTreeSet::new();
    for m in &meetings {
        if !seen.insert(m.transcript.meeting_id().to_string()) {
            return Err(Error::validation(format!(
                "duplicate meeting id {}",
                m.transcript.meeting_id()
            )));
        }
    }
    meetings.sort_by(|a, b| a.transcript.meeting_id().cmp(b.transcript.meeting_id()));
    Ok(meetings)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("meeting").to_string()
}

fn load_file(path: &Path) -> Result<Vec<Meeting>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = file_stem(path);
    let is_jsonl = path.extension().and_then(|e| e.to_str()) == Some("jsonl");
    let mut out = Vec::new();
    if is_jsonl {
        let lines: Vec<(usize, &str)> =
            text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).collect();
        let many = lines.len() > 1;
        for (pos, (lineno, line)) in lines.into_iter().enumerate() {
            let mut de = serde_json::Deserializer::from_str(line);
            let raw: RawMeeting = serde_path_to_error::deserialize(&mut de).map_err(|e| {
                Error::validation(format!("{}:{}: {}: {}", path.display(), lineno + 1, e.path(), e.inner()))
            })?;
            let fallback = if many { format!("{stem}_{pos:03}") } else { stem.clone() };
            out.push(convert(raw, fallback)?);
        }
        return Ok(out);
    }
    let file: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::validation(format!("{}: {}", path.display(), e)))?;
    let values = match file {
        serde_json::Value::Array(v) => v,
        other => vec![other],
    };
    let many = values.len() > 1;
    for (pos, value) in values.into_iter().enumerate() {
        let raw: RawMeeting = serde_path_to_error::deserialize(value).map_err(|e| {
            let at = if many { format!("[{pos}].") } else { String::new() };
            Error::validation(format!("{}: {}{}: {}", path.display(), at, e.path(), e.inner()))
        })?;
        let fallback = if many { format!("{stem}_{pos:03}") } else { stem.clone() };
        out.push(convert(raw, fallback)?);
    }
    Ok(out)
}

fn convert(raw: RawMeeting, fallback_id: String) -> Result<Meeting> {
    let meeting_id = raw.meeting_id.or(raw.id).unwrap_or(fallback_id);
    let transcript = Transcript::new(
        meeting_id.clone(),
        raw.meeting_transcripts.iter().map(|t| (t.speaker.as_str(), t.content.as_str())),
    )?;
    let mut queries = Vec::new();
    for (kind, list, tag) in [
        (QueryKind::General, &raw.general_query_list, 'g'),
        (QueryKind::Specific, &raw.specific_query_list, 's'),
    ] {
        for (i, q) in list.iter().enumerate() {
            queries.push(Query::new(
                format!("{meeting_id}/{tag}{i:02}"),
                meeting_id.clone(),
                &q.query,
                kind,
                Some(q.answer.trim().to_string()),
            )?);
        }
    }
    Ok(Meeting { transcript, queries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    const ONE: &str = r#"{"meeting_transcripts":[{"speaker":"A","content":"Hello there."}],
        "general_query_list":[{"query":"Summarize the meeting.","answer":"A greeted."}],
        "specific_query_list":[]}"#;

    #[test]
    fn single_meeting_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "Bed004.json", ONE);
        let m = load_qmsum(&p).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].transcript.meeting_id(), "Bed004");
        assert_eq!(m[0].queries.len(), 1);
        assert_eq!(m[0].queries[0].query_id(), "Bed004/g00");
        assert_eq!(m[0].queries[0].reference_summary(), Some("A greeted."));
    }

    #[test]
    fn aggregated_list_and_jsonl_and_directories() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "all.json", &format!("[{ONE},{ONE}]"));
        write(dir.path(), "split/test.jsonl", &format!("{}\n{}\n", ONE.replace('\n', ""), ONE.replace('\n', "")));
        write(dir.path(), "notes.txt", "ignored");
        let m = load_qmsum(dir.path()).unwrap();
        let ids: Vec<_> = m.iter().map(|m| m.transcript.meeting_id().to_string()).collect();
        assert_eq!(ids, ["all_000", "all_001", "test_000", "test_001"]);
    }

    #[test]
    fn empty_utterance_names_the_meeting() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "m.json",
            r#"{"meeting_id":"ES2002a","meeting_transcripts":[{"speaker":"A","content":"  "}]}"#,
        );
        let err = load_qmsum(&p).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_VALIDATION);
        assert!(err.to_string().contains("ES2002a"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.json", "{\n\"meeting_transcripts\": [");
        let err = load_qmsum(&p).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let p = write(dir.path(), "bad2.json", r#"{"meeting_transcripts":[{"speaker":"A","content":7}]}"#);
        let err = load_qmsum(&p).unwrap_err().to_string();
        assert!(err.contains("meeting_transcripts[0].content"), "{err}");
        let body = format!("{}\n{{\"meeting_transcripts\":[{{\"speaker\":1}}]}}\n", ONE.replace('\n', ""));
        let p = write(dir.path(), "bad3.jsonl", &body);
        let err = load_qmsum(&p).unwrap_err().to_string();
        assert!(err.contains("bad3.jsonl:2: meeting_transcripts[0].speaker"), "{err}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/X.json", ONE);
        write(dir.path(), "b/X.json", ONE);
        assert!(load_qmsum(dir.path()).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn missing_path_is_io_error() {
        let err = load_qmsum(Path::new("/nonexistent/qmsum")).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_IO);
    }
}

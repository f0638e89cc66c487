use serde_json::Value as Json;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("no JSON object found in model output")]
    NoJson,
    #[error("no JSON object in model output has the key \"{0}\"")]
    WrongKey(String),
    #[error("value under \"{0}\" is not a string")]
    NonString(String),
}

/// Pulls the string under `key` out of the first JSON object that carries
/// it. Surrounding prose and code fences are skipped. Line breaks inside
/// the value are folded into single spaces.
pub fn extract_payload(raw: &str, key: &str) -> Result<String, ExtractError> {
    let mut saw_object = false;
    let mut saw_non_string = false;
    let mut pos = 0;
    while let Some(found) = raw[pos..].find('{') {
        let start = pos + found;
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Json>();
        match stream.next() {
            Some(Ok(Json::Object(map))) => {
                saw_object = true;
                match map.get(key) {
                    Some(Json::String(s)) => return Ok(single_line(s)),
                    Some(_) => saw_non_string = true,
                    None => {}
                }
                pos = start + stream.byte_offset();
            }
            _ => pos = start + 1,
        }
    }
    if saw_non_string {
        Err(ExtractError::NonString(key.to_string()))
    } else if saw_object {
        Err(ExtractError::WrongKey(key.to_string()))
    } else {
        Err(ExtractError::NoJson)
    }
}

fn single_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

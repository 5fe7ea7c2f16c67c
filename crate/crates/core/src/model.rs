//! Document object model for SACRO-extended CycloneDX 1.5 AIBOMs.
//!
//! The model parses CycloneDX 1.5 JSON into typed records, preserves every
//! unknown key verbatim for round-tripping, and exposes the six SACRO
//! extension fields carried in component `properties`. Canonical
//! serialization (the byte form that signing and HMAC binding cover)
//! excludes the top-level `signature` block.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::canonical::to_canonical_bytes;
use crate::util::{is_lower_hex, lenient_base64_decode};

/// Required value of `bomFormat`.
pub const BOM_FORMAT: &str = "CycloneDX";
/// Required value of `specVersion`.
pub const SPEC_VERSION: &str = "1.5";

/// Logical names of the six SACRO extension fields.
pub const SACRO_FIELDS: [&str; 6] = [
    "modelReference",
    "trainingDataSource",
    "inferenceContext",
    "treContainerHash",
    "disclosureControlType",
    "outputDigest",
];

/// Property-name prefix mandated for strict schema compliance.
pub const SACRO_PREFIX: &str = "x-sacrospec-";

/// Marker property set on components whose artifact hash could not be
/// computed; exempts the component from the strict `hash-required` rule.
pub const HASH_UNAVAILABLE_PROPERTY: &str = "x-sacrospec-hash-unavailable";

/// Marker property for dependencies whose version could not be resolved.
pub const UNVERIFIABLE_PROPERTY: &str = "x-sacrospec-unverifiable";

/// Version string assigned to dependencies that carry no resolved version.
pub const UNRESOLVED_VERSION: &str = "unresolved";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("JSON syntax error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("structural error at {path}: {message}")]
    Structural { path: String, message: String },
    #[error(
        "ambiguous value for extension field {field}: \
         property {first_name:?} = {first_value:?} conflicts with {second_name:?} = {second_value:?}"
    )]
    AmbiguousProperty {
        field: String,
        first_name: String,
        first_value: String,
        second_name: String,
        second_value: String,
    },
}

/// Whether SACRO extension properties are written with bare template-style
/// names or the `x-sacrospec-` prefix required for strict compliance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropertyStyle {
    #[default]
    Bare,
    Prefixed,
}

impl PropertyStyle {
    /// Render a logical SACRO field name in this style.
    pub fn property_name(self, field: &str) -> String {
        match self {
            PropertyStyle::Bare => field.to_string(),
            PropertyStyle::Prefixed => format!("{SACRO_PREFIX}{field}"),
        }
    }
}

/// Strip the strict-compliance prefix, yielding the logical field name.
pub fn logical_property_name(name: &str) -> &str {
    name.strip_prefix(SACRO_PREFIX).unwrap_or(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashEntry {
    pub alg: String,
    pub content: String,
}

impl HashEntry {
    /// SHA-256 entry from a 64-char lowercase hex digest.
    pub fn sha256(hex: impl Into<String>) -> Self {
        HashEntry {
            alg: "SHA-256".to_string(),
            content: hex.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub name: String,
    pub value: String,
}

impl PropertyEntry {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        PropertyEntry {
            name: name.into(),
            value: value.into(),
        }
    }
}

/// Component classification carried in the CycloneDX `type` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentType {
    #[serde(rename = "application")]
    Application,
    #[serde(rename = "ai-model")]
    AiModel,
    #[serde(rename = "library")]
    Library,
    #[serde(rename = "container")]
    Container,
}

impl ComponentType {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentType::Application => "application",
            ComponentType::AiModel => "ai-model",
            ComponentType::Library => "library",
            ComponentType::Container => "container",
        }
    }

    /// All tokens the model accepts in the `type` field.
    pub const TOKENS: [&'static str; 4] = ["application", "ai-model", "library", "container"];
}

impl fmt::Display for ComponentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inventoried component: the analytic application, an AI model, a
/// library dependency, or a container image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    #[serde(rename = "type")]
    pub component_type: ComponentType,
    pub name: String,
    pub version: String,
    #[serde(default)]
    pub hashes: Vec<HashEntry>,
    #[serde(default)]
    pub properties: Vec<PropertyEntry>,
    /// Unknown keys (e.g. `purl`, nested `components`), preserved verbatim.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ComponentRecord {
    pub fn new(component_type: ComponentType, name: impl Into<String>, version: impl Into<String>) -> Self {
        ComponentRecord {
            component_type,
            name: name.into(),
            version: version.into(),
            hashes: Vec::new(),
            properties: Vec::new(),
            extra: Map::new(),
        }
    }

    /// First property whose name matches `field` bare or prefixed.
    pub fn property(&self, field: &str) -> Option<&str> {
        self.properties
            .iter()
            .find(|p| logical_property_name(&p.name) == field)
            .map(|p| p.value.as_str())
    }

    /// Remove every property matching `field` (bare or prefixed) and insert
    /// a single entry in the given style.
    pub fn set_property(&mut self, style: PropertyStyle, field: &str, value: impl Into<String>) {
        self.properties
            .retain(|p| logical_property_name(&p.name) != field);
        self.properties
            .push(PropertyEntry::new(style.property_name(field), value));
    }

    /// The component `purl` field, when present.
    pub fn purl(&self) -> Option<&str> {
        self.extra.get("purl").and_then(Value::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub vendor: String,
    pub name: String,
    pub version: String,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ToolDescriptor {
    pub fn new(vendor: impl Into<String>, name: impl Into<String>, version: impl Into<String>) -> Self {
        ToolDescriptor {
            vendor: vendor.into(),
            name: name.into(),
            version: version.into(),
            extra: Map::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentMetadata {
    /// RFC 3339 date-time, stored verbatim.
    pub timestamp: String,
    pub tools: Vec<ToolDescriptor>,
    /// The analytic application this document describes.
    #[serde(rename = "component")]
    pub root_component: ComponentRecord,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalReference {
    #[serde(rename = "type")]
    pub ref_type: String,
    pub url: String,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

/// Detached-signature envelope carried in the top-level `signature` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureEnvelope {
    pub alg: String,
    #[serde(rename = "publicKey")]
    pub public_key: String,
    pub signature: String,
    pub timestamp: String,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

/// Signature algorithm tokens accepted in an envelope.
pub const ENVELOPE_ALGORITHMS: [&str; 2] = ["Ed25519", "ECDSA"];

/// In-memory form of a SACRO-extended CycloneDX 1.5 bill of materials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AibomDocument {
    #[serde(rename = "bomFormat")]
    pub bom_format: String,
    #[serde(rename = "specVersion")]
    pub spec_version: String,
    pub version: u64,
    pub metadata: DocumentMetadata,
    pub components: Vec<ComponentRecord>,
    #[serde(rename = "externalReferences", skip_serializing_if = "Option::is_none")]
    pub external_references: Option<Vec<ExternalReference>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureEnvelope>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl AibomDocument {
    /// Look up a SACRO extension field, searching the root component first
    /// and then the component inventory in document order.
    pub fn lookup_extension(&self, field: &str) -> Option<(&ComponentRecord, &str)> {
        if let Some(v) = self.metadata.root_component.property(field) {
            return Some((&self.metadata.root_component, v));
        }
        self.components
            .iter()
            .find_map(|c| c.property(field).map(|v| (c, v)))
    }
}

/// The six SACRO extension fields extracted from one component.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SacroExtensions {
    #[serde(rename = "modelReference", skip_serializing_if = "Option::is_none")]
    pub model_reference: Option<String>,
    #[serde(rename = "trainingDataSource", skip_serializing_if = "Option::is_none")]
    pub training_data_source: Option<String>,
    #[serde(rename = "inferenceContext", skip_serializing_if = "Option::is_none")]
    pub inference_context: Option<String>,
    #[serde(rename = "treContainerHash", skip_serializing_if = "Option::is_none")]
    pub tre_container_hash: Option<String>,
    #[serde(rename = "disclosureControlType", skip_serializing_if = "Option::is_none")]
    pub disclosure_control_type: Option<String>,
    #[serde(rename = "outputDigest", skip_serializing_if = "Option::is_none")]
    pub output_digest: Option<String>,
}

impl SacroExtensions {
    fn slot(&mut self, field: &str) -> &mut Option<String> {
        match field {
            "modelReference" => &mut self.model_reference,
            "trainingDataSource" => &mut self.training_data_source,
            "inferenceContext" => &mut self.inference_context,
            "treContainerHash" => &mut self.tre_container_hash,
            "disclosureControlType" => &mut self.disclosure_control_type,
            "outputDigest" => &mut self.output_digest,
            _ => unreachable!("not a SACRO field: {field}"),
        }
    }
}

/// Parse UTF-8 JSON text into a document, enforcing the model invariants.
///
/// Unknown keys at every level are preserved verbatim. Syntax errors carry
/// the byte offset; invariant violations carry the JSON path.
pub fn parse_document(bytes: &[u8]) -> Result<AibomDocument, ModelError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: AibomDocument = match serde_path_to_error::deserialize(&mut de) {
        Ok(doc) => doc,
        Err(err) => return Err(convert_serde_error(bytes, err)),
    };
    check_invariants(&doc)?;
    Ok(doc)
}

fn convert_serde_error(bytes: &[u8], err: serde_path_to_error::Error<serde_json::Error>) -> ModelError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    if inner.is_syntax() || inner.is_eof() {
        let (line, column) = (inner.line(), inner.column());
        ModelError::Parse {
            offset: byte_offset(bytes, line, column),
            line,
            column,
            message: inner.to_string(),
        }
    } else {
        ModelError::Structural {
            path: if path == "." { "/".to_string() } else { format!("/{}", path.replace('.', "/")) },
            message: inner.to_string(),
        }
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining_newlines = line - 1;
    let mut offset = 0;
    for (i, b) in bytes.iter().enumerate() {
        if remaining_newlines == 0 {
            break;
        }
        if *b == b'\n' {
            remaining_newlines -= 1;
            offset = i + 1;
        }
    }
    offset + column.saturating_sub(1)
}

fn structural(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Structural {
        path: path.into(),
        message: message.into(),
    }
}

fn check_invariants(doc: &AibomDocument) -> Result<(), ModelError> {
    if doc.bom_format != BOM_FORMAT {
        return Err(structural(
            "/bomFormat",
            format!("expected {BOM_FORMAT:?}, found {:?}", doc.bom_format),
        ));
    }
    if doc.spec_version != SPEC_VERSION {
        return Err(structural(
            "/specVersion",
            format!("expected {SPEC_VERSION:?}, found {:?}", doc.spec_version),
        ));
    }
    if doc.version < 1 {
        return Err(structural("/version", "document version must be >= 1"));
    }
    if chrono::DateTime::parse_from_rfc3339(&doc.metadata.timestamp).is_err() {
        return Err(structural(
            "/metadata/timestamp",
            format!("not a valid RFC 3339 date-time: {:?}", doc.metadata.timestamp),
        ));
    }
    if doc.metadata.tools.is_empty() {
        return Err(structural("/metadata/tools", "tools list must be non-empty"));
    }
    check_component(&doc.metadata.root_component, "/metadata/component")?;
    for (i, component) in doc.components.iter().enumerate() {
        check_component(component, &format!("/components/{i}"))?;
    }
    if let Some(refs) = &doc.external_references {
        for (i, r) in refs.iter().enumerate() {
            if url::Url::parse(&r.url).is_err() {
                return Err(structural(
                    format!("/externalReferences/{i}/url"),
                    format!("not an absolute URL: {:?}", r.url),
                ));
            }
        }
    }
    if let Some(sig) = &doc.signature {
        if !ENVELOPE_ALGORITHMS.contains(&sig.alg.as_str()) {
            return Err(structural(
                "/signature/alg",
                format!("unsupported signature algorithm {:?}", sig.alg),
            ));
        }
        if lenient_base64_decode(&sig.public_key).is_none() {
            return Err(structural("/signature/publicKey", "not valid base64"));
        }
        if lenient_base64_decode(&sig.signature).is_none() {
            return Err(structural("/signature/signature", "not valid base64"));
        }
    }
    Ok(())
}

fn check_component(component: &ComponentRecord, path: &str) -> Result<(), ModelError> {
    for (j, hash) in component.hashes.iter().enumerate() {
        if hash.alg.is_empty() {
            return Err(structural(format!("{path}/hashes/{j}/alg"), "hash alg must be non-empty"));
        }
        if hash.alg == "SHA-256" && !is_lower_hex(&hash.content, 64) {
            return Err(structural(
                format!("{path}/hashes/{j}/content"),
                format!(
                    "SHA-256 content must be exactly 64 lowercase hex characters, found {:?}",
                    hash.content
                ),
            ));
        }
    }
    if component.component_type == ComponentType::AiModel && component.properties.is_empty() {
        return Err(structural(
            format!("{path}/properties"),
            "ai-model components must carry a non-empty properties list",
        ));
    }
    Ok(())
}

/// Serialize a document to its canonical byte form.
///
/// The top-level `signature` block is excluded so that a signature covers
/// all content except itself. Output is a pure function of document
/// content: equal documents yield identical bytes.
pub fn serialize_canonical(doc: &AibomDocument) -> Vec<u8> {
    let mut value = serde_json::to_value(doc).expect("document serialization is infallible");
    if let Value::Object(map) = &mut value {
        map.remove("signature");
    }
    to_canonical_bytes(&value)
}

/// Extract the six SACRO extension fields from a component's properties.
///
/// Both bare template-style names and `x-sacrospec-` prefixed names are
/// accepted. Duplicate entries for the same logical field with equal values
/// collapse; conflicting values are an error naming both entries.
pub fn extract_sacro_properties(component: &ComponentRecord) -> Result<SacroExtensions, ModelError> {
    let mut out = SacroExtensions::default();
    let mut first_entry: [Option<&PropertyEntry>; 6] = [None; 6];
    for property in &component.properties {
        let logical = logical_property_name(&property.name);
        let Some(idx) = SACRO_FIELDS.iter().position(|f| *f == logical) else {
            continue;
        };
        match first_entry[idx] {
            None => {
                first_entry[idx] = Some(property);
                *out.slot(SACRO_FIELDS[idx]) = Some(property.value.clone());
            }
            Some(first) if first.value != property.value => {
                return Err(ModelError::AmbiguousProperty {
                    field: SACRO_FIELDS[idx].to_string(),
                    first_name: first.name.clone(),
                    first_value: first.value.clone(),
                    second_name: property.name.clone(),
                    second_value: property.value.clone(),
                });
            }
            Some(_) => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc_json() -> String {
        r#"{
            "bomFormat": "CycloneDX",
            "specVersion": "1.5",
            "version": 1,
            "metadata": {
                "timestamp": "2025-06-20T14:30:00Z",
                "tools": [{"vendor": "SACRO", "name": "AIBOM Generator", "version": "1.0.0"}],
                "component": {
                    "type": "application",
                    "name": "pipeline",
                    "version": "1.0.0",
                    "hashes": [{"alg": "SHA-256", "content": "8f14e45fceeaa167a5a36dedd4bea2543eaa0d5e5ac4f6dc0fa6efb2c73d153a"}]
                }
            },
            "components": []
        }"#
        .to_string()
    }

    #[test]
    fn parses_minimal_document_with_empty_components() {
        let doc = parse_document(minimal_doc_json().as_bytes()).unwrap();
        assert_eq!(doc.bom_format, "CycloneDX");
        assert_eq!(doc.spec_version, "1.5");
        assert_eq!(doc.version, 1);
        assert!(doc.components.is_empty());
        assert!(doc.signature.is_none());
    }

    #[test]
    fn malformed_json_reports_byte_offset() {
        let err = parse_document(br#"{"bomFormat": }"#).unwrap_err();
        match err {
            ModelError::Parse { offset, .. } => assert_eq!(offset, 14),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn type_mismatch_names_path() {
        let text = minimal_doc_json().replace("\"version\": 1,", "\"version\": \"one\",");
        let err = parse_document(text.as_bytes()).unwrap_err();
        match err {
            ModelError::Structural { path, .. } => assert!(path.contains("version"), "path = {path}"),
            other => panic!("expected structural error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_bom_format() {
        let text = minimal_doc_json().replace("CycloneDX", "SPDX");
        let err = parse_document(text.as_bytes()).unwrap_err();
        match err {
            ModelError::Structural { path, .. } => assert_eq!(path, "/bomFormat"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_uppercase_sha256_content() {
        let text = minimal_doc_json().replace("8f14e45f", "8F14E45F");
        let err = parse_document(text.as_bytes()).unwrap_err();
        match err {
            ModelError::Structural { path, .. } => {
                assert_eq!(path, "/metadata/component/hashes/0/content");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_timestamp() {
        let text = minimal_doc_json().replace("2025-06-20T14:30:00Z", "June 20, 2025");
        let err = parse_document(text.as_bytes()).unwrap_err();
        match err {
            ModelError::Structural { path, .. } => assert_eq!(path, "/metadata/timestamp"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_round_trip() {
        let text = minimal_doc_json().replace(
            "\"components\": []",
            "\"components\": [], \"serialNumber\": \"urn:uuid:3e671687-395b-41f5-a30f-a58921a69b79\", \"custom\": {\"nested\": [1, 2]}",
        );
        let doc = parse_document(text.as_bytes()).unwrap();
        assert!(doc.extra.contains_key("serialNumber"));
        let reparsed = parse_document(&serialize_canonical(&doc)).unwrap();
        assert_eq!(doc, reparsed);
    }

    #[test]
    fn canonical_is_idempotent_and_whitespace_insensitive() {
        let doc = parse_document(minimal_doc_json().as_bytes()).unwrap();
        let c1 = serialize_canonical(&doc);
        let reparsed = parse_document(&c1).unwrap();
        assert_eq!(serialize_canonical(&reparsed), c1);
    }

    #[test]
    fn canonical_excludes_signature() {
        let unsigned = parse_document(minimal_doc_json().as_bytes()).unwrap();
        let mut signed = unsigned.clone();
        signed.signature = Some(SignatureEnvelope {
            alg: "Ed25519".to_string(),
            public_key: "AAAA".to_string(),
            signature: "BBBB".to_string(),
            timestamp: "2025-06-20T14:31:00Z".to_string(),
            extra: Map::new(),
        });
        assert_eq!(serialize_canonical(&unsigned), serialize_canonical(&signed));
    }

    #[test]
    fn extracts_bare_and_prefixed_properties() {
        let mut component = ComponentRecord::new(ComponentType::AiModel, "model", "1.0");
        component.properties = vec![
            PropertyEntry::new("trainingDataSource", "registry v5"),
            PropertyEntry::new("x-sacrospec-disclosureControlType", "top-coding"),
        ];
        let ext = extract_sacro_properties(&component).unwrap();
        assert_eq!(ext.training_data_source.as_deref(), Some("registry v5"));
        assert_eq!(ext.disclosure_control_type.as_deref(), Some("top-coding"));
        assert!(ext.output_digest.is_none());
    }

    #[test]
    fn empty_properties_extract_to_all_absent() {
        let component = ComponentRecord::new(ComponentType::Library, "numpy", "1.26.4");
        assert_eq!(extract_sacro_properties(&component).unwrap(), SacroExtensions::default());
    }

    #[test]
    fn conflicting_duplicate_properties_are_ambiguous() {
        let mut component = ComponentRecord::new(ComponentType::AiModel, "model", "1.0");
        component.properties = vec![
            PropertyEntry::new("outputDigest", "sha256:aa"),
            PropertyEntry::new("x-sacrospec-outputDigest", "sha256:bb"),
        ];
        let err = extract_sacro_properties(&component).unwrap_err();
        match err {
            ModelError::AmbiguousProperty { field, .. } => assert_eq!(field, "outputDigest"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equal_duplicate_properties_collapse() {
        let mut component = ComponentRecord::new(ComponentType::AiModel, "model", "1.0");
        component.properties = vec![
            PropertyEntry::new("outputDigest", "sha256:aa"),
            PropertyEntry::new("x-sacrospec-outputDigest", "sha256:aa"),
        ];
        let ext = extract_sacro_properties(&component).unwrap();
        assert_eq!(ext.output_digest.as_deref(), Some("sha256:aa"));
    }
}

//! Decoder for Android's binary XML encoding (the compiled
//! `AndroidManifest.xml`).
//!
//! The document is a sequence of chunks: one string pool, an optional
//! resource-id map that lines attribute names up with framework attribute
//! ids, then namespace and element start/end nodes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

const RES_XML_TYPE: u16 = 0x0003;
const RES_STRING_POOL_TYPE: u16 = 0x0001;
const RES_XML_RESOURCE_MAP_TYPE: u16 = 0x0180;
const RES_XML_START_NAMESPACE_TYPE: u16 = 0x0100;
const RES_XML_END_NAMESPACE_TYPE: u16 = 0x0101;
const RES_XML_START_ELEMENT_TYPE: u16 = 0x0102;
const RES_XML_END_ELEMENT_TYPE: u16 = 0x0103;

const UTF8_FLAG: u32 = 0x100;
const NO_INDEX: u32 = 0xFFFF_FFFF;

pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

/// Framework attribute ids for the names the manifest projection needs, used
/// when an obfuscated pool leaves the attribute name empty.
const KNOWN_ATTRS: &[(u32, &str)] = &[
    (0x0101_0003, "name"),
    (0x0101_0202, "targetActivity"),
    (0x0101_020c, "minSdkVersion"),
    (0x0101_021b, "versionCode"),
    (0x0101_021c, "versionName"),
    (0x0101_0270, "targetSdkVersion"),
    (0x0101_0271, "maxSdkVersion"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxmlError {
    #[error("not a binary XML document")]
    NotBinaryXml,
    #[error("truncated chunk at offset {0}")]
    TruncatedChunk(usize),
    #[error("string index {0} is outside the string pool")]
    BadStringIndex(u32),
    #[error("unbalanced element nesting at offset {0}")]
    UnbalancedTree(usize),
    #[error("document has no root element")]
    NoRootElement,
}

/// A typed attribute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedValue {
    Null,
    String(String),
    Int(i32),
    IntHex(u32),
    Bool(bool),
    Reference(u32),
    Attribute(u32),
    /// IEEE-754 bits.
    Float(u32),
    Other { data_type: u8, data: u32 },
}

impl TypedValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            TypedValue::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            TypedValue::Int(i) => Some(*i as i64),
            TypedValue::IntHex(i) => Some(*i as i64),
            TypedValue::String(s) => s.trim().parse().ok(),
            _ => None,
        }
    }
}

/// Renders values the way common manifest dump tools print them.
impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Null => Ok(()),
            TypedValue::String(s) => f.write_str(s),
            TypedValue::Int(i) => write!(f, "{i}"),
            TypedValue::IntHex(i) => write!(f, "0x{i:08X}"),
            TypedValue::Bool(b) => f.write_str(if *b { "true" } else { "false" }),
            TypedValue::Reference(r) => {
                if r >> 24 == 1 {
                    write!(f, "@android:{r:08X}")
                } else {
                    write!(f, "@{r:08X}")
                }
            }
            TypedValue::Attribute(r) => {
                if r >> 24 == 1 {
                    write!(f, "?android:{r:08X}")
                } else {
                    write!(f, "?{r:08X}")
                }
            }
            TypedValue::Float(bits) => write!(f, "{}", f32::from_bits(*bits)),
            TypedValue::Other { data, .. } => write!(f, "#{data:08X}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub namespace: Option<String>,
    pub name: String,
    pub resource_id: Option<u32>,
    pub value: TypedValue,
}

impl Attribute {
    pub fn is_android(&self) -> bool {
        self.namespace.as_deref() == Some(ANDROID_NS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub namespace: Option<String>,
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Element>,
}

impl Element {
    /// Attribute in the android namespace, matched by name or by framework
    /// resource id.
    pub fn android_attr(&self, name: &str) -> Option<&TypedValue> {
        let id = KNOWN_ATTRS.iter().find(|(_, n)| *n == name).map(|(id, _)| *id);
        self.attributes
            .iter()
            .find(|a| {
                (a.is_android() && a.name == name)
                    || (id.is_some() && a.resource_id == id)
            })
            .map(|a| &a.value)
    }

    /// Attribute without a namespace, such as `package` on the root.
    pub fn plain_attr(&self, name: &str) -> Option<&TypedValue> {
        self.attributes
            .iter()
            .find(|a| a.namespace.is_none() && a.name == name)
            .map(|a| &a.value)
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    /// Pre-order traversal with depth.
    pub fn walk(&self) -> Vec<(usize, &Element)> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(0usize, self)];
        while let Some((depth, e)) = stack.pop() {
            out.push((depth, e));
            for c in e.children.iter().rev() {
                stack.push((depth + 1, c));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxmlDocument {
    pub string_pool: Vec<String>,
    pub resource_ids: Vec<u32>,
    pub root: Element,
}

struct Reader<'a> {
    data: &'a [u8],
}

impl<'a> Reader<'a> {
    fn u8(&self, at: usize) -> Result<u8, AxmlError> {
        self.data.get(at).copied().ok_or(AxmlError::TruncatedChunk(at))
    }

    fn u16(&self, at: usize) -> Result<u16, AxmlError> {
        self.data
            .get(at..at + 2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .ok_or(AxmlError::TruncatedChunk(at))
    }

    fn u32(&self, at: usize) -> Result<u32, AxmlError> {
        self.data
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or(AxmlError::TruncatedChunk(at))
    }
}

fn parse_string_pool(r: &Reader<'_>, chunk: usize, header_size: usize, size: usize) -> Result<Vec<String>, AxmlError> {
    let count = r.u32(chunk + 8)? as usize;
    let flags = r.u32(chunk + 16)?;
    let strings_start = r.u32(chunk + 20)? as usize;
    let end = chunk + size;
    if chunk + header_size + count.saturating_mul(4) > end {
        return Err(AxmlError::TruncatedChunk(chunk));
    }
    let base = chunk + strings_start;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let at = base + r.u32(chunk + header_size + 4 * i)? as usize;
        if at >= end {
            return Err(AxmlError::TruncatedChunk(at));
        }
        let s = if flags & UTF8_FLAG != 0 {
            // utf-16 length then utf-8 byte length, each 1 or 2 bytes
            let mut p = at;
            let skip = if r.u8(p)? & 0x80 != 0 { 2 } else { 1 };
            p += skip;
            let mut len = r.u8(p)? as usize;
            if len & 0x80 != 0 {
                len = ((len & 0x7F) << 8) | r.u8(p + 1)? as usize;
                p += 2;
            } else {
                p += 1;
            }
            let bytes = r.data.get(p..p + len).filter(|_| p + len <= end).ok_or(AxmlError::TruncatedChunk(p))?;
            String::from_utf8_lossy(bytes).into_owned()
        } else {
            let mut p = at;
            let mut len = r.u16(p)? as usize;
            if len & 0x8000 != 0 {
                len = ((len & 0x7FFF) << 16) | r.u16(p + 2)? as usize;
                p += 4;
            } else {
                p += 2;
            }
            if p + 2 * len > end {
                return Err(AxmlError::TruncatedChunk(p));
            }
            let units: Vec<u16> = (0..len).map(|k| r.u16(p + 2 * k)).collect::<Result<_, _>>()?;
            String::from_utf16_lossy(&units)
        };
        out.push(s);
    }
    Ok(out)
}

fn string_at(pool: &[String], idx: u32) -> Result<&str, AxmlError> {
    pool.get(idx as usize)
        .map(String::as_str)
        .ok_or(AxmlError::BadStringIndex(idx))
}

fn typed_value(pool: &[String], data_type: u8, data: u32) -> Result<TypedValue, AxmlError> {
    Ok(match data_type {
        0x00 => TypedValue::Null,
        0x01 => TypedValue::Reference(data),
        0x02 => TypedValue::Attribute(data),
        0x03 => TypedValue::String(string_at(pool, data)?.into()),
        0x04 => TypedValue::Float(data),
        0x10 => TypedValue::Int(data as i32),
        0x11 => TypedValue::IntHex(data),
        0x12 => TypedValue::Bool(data != 0),
        other => TypedValue::Other { data_type: other, data },
    })
}

/// Decodes a binary XML document into an element tree.
pub fn decode_axml(bytes: &[u8]) -> Result<AxmlDocument, AxmlError> {
    let r = Reader { data: bytes };
    if bytes.len() < 8 || r.u16(0)? != RES_XML_TYPE || r.u16(2)? != 8 {
        return Err(AxmlError::NotBinaryXml);
    }
    let declared = r.u32(4)? as usize;
    if declared < 8 || declared > bytes.len() {
        return Err(AxmlError::TruncatedChunk(0));
    }
    let end = declared;

    let mut pool: Vec<String> = Vec::new();
    let mut resource_ids: Vec<u32> = Vec::new();
    let mut namespaces: Vec<(u32, u32)> = Vec::new();
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let mut at = 8;
    while at + 8 <= end {
        let kind = r.u16(at)?;
        let header_size = r.u16(at + 2)? as usize;
        let size = r.u32(at + 4)? as usize;
        if size < 8 || header_size > size || at + size > end {
            return Err(AxmlError::TruncatedChunk(at));
        }
        match kind {
            RES_STRING_POOL_TYPE => pool = parse_string_pool(&r, at, header_size, size)?,
            RES_XML_RESOURCE_MAP_TYPE => {
                resource_ids = (0..(size - header_size) / 4)
                    .map(|i| r.u32(at + header_size + 4 * i))
                    .collect::<Result<_, _>>()?;
            }
            RES_XML_START_NAMESPACE_TYPE => {
                let prefix = r.u32(at + header_size)?;
                let uri = r.u32(at + header_size + 4)?;
                namespaces.push((prefix, uri));
            }
            RES_XML_END_NAMESPACE_TYPE => {
                namespaces.pop();
            }
            RES_XML_START_ELEMENT_TYPE => {
                let ext = at + header_size;
                let ns = r.u32(ext)?;
                let name = r.u32(ext + 4)?;
                let attr_start = r.u16(ext + 8)? as usize;
                let attr_size = r.u16(ext + 10)? as usize;
                let attr_count = r.u16(ext + 12)? as usize;
                if attr_count > 0 && (attr_size < 20 || ext + attr_start + attr_count * attr_size > at + size) {
                    return Err(AxmlError::TruncatedChunk(at));
                }
                let mut attributes = Vec::with_capacity(attr_count);
                for i in 0..attr_count {
                    let a = ext + attr_start + i * attr_size;
                    let a_ns = r.u32(a)?;
                    let a_name = r.u32(a + 4)?;
                    let data_type = r.u8(a + 15)?;
                    let data = r.u32(a + 16)?;
                    let resource_id = resource_ids.get(a_name as usize).copied();
                    let mut name = String::from(string_at(&pool, a_name)?);
                    if name.is_empty() {
                        if let Some((_, known)) = KNOWN_ATTRS.iter().find(|(id, _)| Some(*id) == resource_id) {
                            name = String::from(*known);
                        }
                    }
                    let namespace = if a_ns == NO_INDEX { None } else { Some(string_at(&pool, a_ns)?.into()) };
                    attributes.push(Attribute {
                        namespace,
                        name,
                        resource_id,
                        value: typed_value(&pool, data_type, data)?,
                    });
                }
                stack.push(Element {
                    namespace: if ns == NO_INDEX { None } else { Some(string_at(&pool, ns)?.into()) },
                    name: string_at(&pool, name)?.into(),
                    attributes,
                    children: Vec::new(),
                });
            }
            RES_XML_END_ELEMENT_TYPE => {
                let name = r.u32(at + header_size + 4)?;
                let done = stack.pop().ok_or(AxmlError::UnbalancedTree(at))?;
                if string_at(&pool, name)? != done.name {
                    return Err(AxmlError::UnbalancedTree(at));
                }
                match stack.last_mut() {
                    Some(parent) => parent.children.push(done),
                    None if root.is_none() => root = Some(done),
                    None => {}
                }
            }
            _ => {}
        }
        at += size;
    }
    if !stack.is_empty() {
        return Err(AxmlError::UnbalancedTree(end));
    }
    let root = root.ok_or(AxmlError::NoRootElement)?;
    Ok(AxmlDocument { string_pool: pool, resource_ids, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{an, axml, el, fixture_apk, Val};
    use alloc::vec;

    fn sample() -> Vec<u8> {
        axml(&el(
            "manifest",
            vec![(false, "package", Val::Str("com.example.loan")), (true, "versionCode", Val::Int(7))],
            vec![
                el("uses-permission", vec![an("android.permission.READ_CONTACTS")], vec![]),
                el("application", vec![(true, "debuggable", Val::Bool(false))], vec![]),
            ],
        ))
    }

    #[test]
    fn decodes_tree_and_typed_values() {
        let doc = decode_axml(&sample()).unwrap();
        assert_eq!(doc.root.name, "manifest");
        assert_eq!(doc.root.plain_attr("package").and_then(TypedValue::as_str), Some("com.example.loan"));
        assert_eq!(doc.root.android_attr("versionCode"), Some(&TypedValue::Int(7)));
        assert_eq!(doc.root.children.len(), 2);
        let app = &doc.root.children[1];
        assert_eq!(app.android_attr("debuggable"), Some(&TypedValue::Bool(false)));
    }

    #[test]
    fn plain_text_is_rejected() {
        let text = b"<?xml version=\"1.0\"?><manifest package=\"a.b\"/>";
        assert_eq!(decode_axml(text), Err(AxmlError::NotBinaryXml));
        assert_eq!(decode_axml(b""), Err(AxmlError::NotBinaryXml));
    }

    #[test]
    fn out_of_pool_string_index() {
        let mut bytes = sample();
        // The first start-element chunk names its element through the pool;
        // point that at an index past the end.
        let pos = find_chunk(&bytes, RES_XML_START_ELEMENT_TYPE);
        bytes[pos + 16 + 4..pos + 16 + 8].copy_from_slice(&9999u32.to_le_bytes());
        assert_eq!(decode_axml(&bytes), Err(AxmlError::BadStringIndex(9999)));
    }

    #[test]
    fn truncated_document() {
        let bytes = sample();
        let cut = &bytes[..bytes.len() - 10];
        assert!(matches!(decode_axml(cut), Err(AxmlError::TruncatedChunk(_))));
    }

    #[test]
    fn mismatched_end_element() {
        let mut bytes = sample();
        let pos = find_last_chunk(&bytes, RES_XML_END_ELEMENT_TYPE);
        // Rename the closing tag of the root to the pool's first string.
        bytes[pos + 16 + 4..pos + 16 + 8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(decode_axml(&bytes), Err(AxmlError::UnbalancedTree(_))));
    }

    #[test]
    fn reference_values_render_like_dump_tools() {
        assert_eq!(alloc::format!("{}", TypedValue::Reference(0x7F0B_0001)), "@7F0B0001");
        assert_eq!(alloc::format!("{}", TypedValue::Reference(0x0104_0000)), "@android:01040000");
        assert_eq!(alloc::format!("{}", TypedValue::Bool(true)), "true");
    }

    #[test]
    fn decodes_utf8_pool_fixture() {
        let apk = fixture_apk("com.fx.pesarahisi");
        let archive = crate::apk::open_archive(&apk).unwrap();
        let doc = decode_axml(&archive.read_entry("AndroidManifest.xml").unwrap()).unwrap();
        assert_eq!(doc.root.plain_attr("package").and_then(TypedValue::as_str), Some("com.fx.pesarahisi"));
    }

    fn chunks(bytes: &[u8]) -> Vec<(usize, u16)> {
        let mut out = vec![];
        let mut at = 8;
        while at + 8 <= bytes.len() {
            let kind = u16::from_le_bytes([bytes[at], bytes[at + 1]]);
            let size = u32::from_le_bytes(bytes[at + 4..at + 8].try_into().unwrap()) as usize;
            out.push((at, kind));
            at += size;
        }
        out
    }

    fn find_chunk(bytes: &[u8], kind: u16) -> usize {
        chunks(bytes).into_iter().find(|(_, k)| *k == kind).unwrap().0
    }

    fn find_last_chunk(bytes: &[u8], kind: u16) -> usize {
        chunks(bytes).into_iter().rfind(|(_, k)| *k == kind).unwrap().0
    }
}

//! Dalvik executable parsing: id tables, class definitions, code items, and
//! the invoke / field-read references inside method bodies.

pub mod opcodes;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use opcodes::InvokeKind;

const HEADER_SIZE: usize = 0x70;
const NO_INDEX: u32 = 0xFFFF_FFFF;
const ACC_ABSTRACT: u32 = 0x0400;
const ACC_NATIVE: u32 = 0x0100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DexError {
    #[error("bad DEX magic")]
    BadMagic,
    #[error("file truncated at offset {0}")]
    TruncatedFile(usize),
    #[error("{table} index {index} out of range")]
    IndexOutOfRange { table: &'static str, index: u32 },
    #[error("invalid type descriptor {0:?}")]
    InvalidDescriptor(String),
    #[error("instruction stream of {method} overruns its code item at unit {at}")]
    MalformedCode { method: String, at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodRef {
    pub class_descriptor: String,
    pub name: String,
    pub parameter_descriptors: Vec<String>,
    pub return_descriptor: String,
}

impl MethodRef {
    pub fn new(class: &str, name: &str, params: &[&str], ret: &str) -> Self {
        MethodRef {
            class_descriptor: class.into(),
            name: name.into(),
            parameter_descriptors: params.iter().map(|p| String::from(*p)).collect(),
            return_descriptor: ret.into(),
        }
    }
}

/// `Lpkg/Cls;->name(params)ret`, the smali form.
impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}(", self.class_descriptor, self.name)?;
        for p in &self.parameter_descriptors {
            f.write_str(p)?;
        }
        write!(f, "){}", self.return_descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldRef {
    pub class_descriptor: String,
    pub name: String,
    pub type_descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeItem {
    pub registers: u16,
    pub insns: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMethod {
    pub method_idx: u32,
    pub access_flags: u32,
    pub code: Option<CodeItem>,
}

impl EncodedMethod {
    pub fn is_abstract_or_native(&self) -> bool {
        self.access_flags & (ACC_ABSTRACT | ACC_NATIVE) != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub descriptor: String,
    pub superclass: Option<String>,
    pub access_flags: u32,
    /// Direct methods first, then virtual, as stored.
    pub methods: Vec<EncodedMethod>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DexFile {
    pub strings: Vec<String>,
    pub types: Vec<String>,
    pub fields: Vec<FieldRef>,
    pub methods: Vec<MethodRef>,
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Invocation {
    pub caller: MethodRef,
    pub callee: MethodRef,
    pub kind: InvokeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldRead {
    pub method: MethodRef,
    pub field: FieldRef,
}

struct Cursor<'a> {
    data: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn bytes(&self, at: usize, len: usize) -> Result<&'a [u8], DexError> {
        at.checked_add(len)
            .and_then(|end| self.data.get(at..end))
            .ok_or(DexError::TruncatedFile(at))
    }

    fn u16(&self, at: usize) -> Result<u16, DexError> {
        let b = self.bytes(at, 2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&self, at: usize) -> Result<u32, DexError> {
        let b = self.bytes(at, 4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn uleb(&self, at: &mut usize) -> Result<u32, DexError> {
        let mut result = 0u32;
        for i in 0..5 {
            let b = *self.data.get(*at).ok_or(DexError::TruncatedFile(*at))?;
            *at += 1;
            result |= ((b & 0x7f) as u32) << (7 * i);
            if b & 0x80 == 0 {
                break;
            }
        }
        Ok(result)
    }

    /// Checks that a table of `count` records of `size` bytes fits.
    fn table(&self, off: u32, count: u32, size: usize) -> Result<usize, DexError> {
        let off = off as usize;
        if count > 0 {
            self.bytes(off, count as usize * size)?;
        }
        Ok(off)
    }
}

/// Modified UTF-8 as used by the DEX string section.
fn decode_mutf8(bytes: &[u8]) -> String {
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i] as u16;
        let rest = |k: usize| bytes.get(i + k).map(|x| (*x as u16) & 0x3f).unwrap_or(0);
        if b & 0x80 == 0 {
            units.push(b);
            i += 1;
        } else if b & 0xe0 == 0xc0 {
            units.push(((b & 0x1f) << 6) | rest(1));
            i += 2;
        } else {
            units.push(((b & 0x0f) << 12) | (rest(1) << 6) | rest(2));
            i += 3;
        }
    }
    String::from_utf16_lossy(&units)
}

/// Field or method type descriptor grammar.
pub fn is_valid_descriptor(d: &str) -> bool {
    let body = d.trim_start_matches('[');
    if d.len() - body.len() > 255 {
        return false;
    }
    match body.as_bytes() {
        [b'V'] => body.len() == d.len(),
        [b'Z' | b'B' | b'S' | b'C' | b'I' | b'J' | b'F' | b'D'] => true,
        [b'L', .., b';'] => {
            let inner = &body[1..body.len() - 1];
            !inner.is_empty() && inner.split('/').all(|seg| !seg.is_empty() && !seg.contains(';'))
        }
        _ => false,
    }
}

pub fn parse_dex(bytes: &[u8]) -> Result<DexFile, DexError> {
    if bytes.len() < 8 || &bytes[0..4] != b"dex\n" || bytes[7] != 0 {
        return Err(DexError::BadMagic);
    }
    let c = Cursor { data: bytes };
    if bytes.len() < HEADER_SIZE {
        return Err(DexError::TruncatedFile(bytes.len()));
    }
    let h = |at: usize| c.u32(at);
    let (string_ids_size, string_ids_off) = (h(56)?, h(60)?);
    let (type_ids_size, type_ids_off) = (h(64)?, h(68)?);
    let (proto_ids_size, proto_ids_off) = (h(72)?, h(76)?);
    let (field_ids_size, field_ids_off) = (h(80)?, h(84)?);
    let (method_ids_size, method_ids_off) = (h(88)?, h(92)?);
    let (class_defs_size, class_defs_off) = (h(96)?, h(100)?);

    let off = c.table(string_ids_off, string_ids_size, 4)?;
    let mut strings = Vec::with_capacity(string_ids_size as usize);
    for i in 0..string_ids_size as usize {
        let mut at = c.u32(off + 4 * i)? as usize;
        c.uleb(&mut at)?;
        let rest = bytes.get(at..).ok_or(DexError::TruncatedFile(at))?;
        let len = rest.iter().position(|b| *b == 0).ok_or(DexError::TruncatedFile(at))?;
        strings.push(decode_mutf8(&rest[..len]));
    }
    let string = |idx: u32| -> Result<&String, DexError> {
        strings.get(idx as usize).ok_or(DexError::IndexOutOfRange { table: "string", index: idx })
    };

    let off = c.table(type_ids_off, type_ids_size, 4)?;
    let mut types = Vec::with_capacity(type_ids_size as usize);
    for i in 0..type_ids_size as usize {
        types.push(string(c.u32(off + 4 * i)?)?.clone());
    }
    let ty = |idx: u32| -> Result<&String, DexError> {
        types.get(idx as usize).ok_or(DexError::IndexOutOfRange { table: "type", index: idx })
    };
    let checked_ty = |idx: u32| -> Result<String, DexError> {
        let t = ty(idx)?;
        if is_valid_descriptor(t) {
            Ok(t.clone())
        } else {
            Err(DexError::InvalidDescriptor(t.clone()))
        }
    };

    let off = c.table(proto_ids_off, proto_ids_size, 12)?;
    let mut protos: Vec<(Vec<String>, String)> = Vec::with_capacity(proto_ids_size as usize);
    for i in 0..proto_ids_size as usize {
        let at = off + 12 * i;
        let ret = checked_ty(c.u32(at + 4)?)?;
        let params_off = c.u32(at + 8)? as usize;
        let mut params = Vec::new();
        if params_off != 0 {
            let n = c.u32(params_off)? as usize;
            c.bytes(params_off + 4, n * 2)?;
            for k in 0..n {
                params.push(checked_ty(c.u16(params_off + 4 + 2 * k)? as u32)?);
            }
        }
        protos.push((params, ret));
    }

    let off = c.table(field_ids_off, field_ids_size, 8)?;
    let mut fields = Vec::with_capacity(field_ids_size as usize);
    for i in 0..field_ids_size as usize {
        let at = off + 8 * i;
        fields.push(FieldRef {
            class_descriptor: checked_ty(c.u16(at)? as u32)?,
            type_descriptor: checked_ty(c.u16(at + 2)? as u32)?,
            name: string(c.u32(at + 4)?)?.clone(),
        });
    }

    let off = c.table(method_ids_off, method_ids_size, 8)?;
    let mut methods = Vec::with_capacity(method_ids_size as usize);
    for i in 0..method_ids_size as usize {
        let at = off + 8 * i;
        let proto_idx = c.u16(at + 2)? as u32;
        let (params, ret) = protos
            .get(proto_idx as usize)
            .ok_or(DexError::IndexOutOfRange { table: "proto", index: proto_idx })?;
        methods.push(MethodRef {
            class_descriptor: checked_ty(c.u16(at)? as u32)?,
            name: string(c.u32(at + 4)?)?.clone(),
            parameter_descriptors: params.clone(),
            return_descriptor: ret.clone(),
        });
    }

    let off = c.table(class_defs_off, class_defs_size, 32)?;
    let mut classes = Vec::with_capacity(class_defs_size as usize);
    for i in 0..class_defs_size as usize {
        let at = off + 32 * i;
        let super_idx = c.u32(at + 8)?;
        let class_data_off = c.u32(at + 24)? as usize;
        let mut class_methods = Vec::new();
        if class_data_off != 0 {
            let mut p = class_data_off;
            let static_fields = c.uleb(&mut p)?;
            let instance_fields = c.uleb(&mut p)?;
            let direct = c.uleb(&mut p)?;
            let virtual_ = c.uleb(&mut p)?;
            for _ in 0..(static_fields as u64 + instance_fields as u64) {
                c.uleb(&mut p)?;
                c.uleb(&mut p)?;
            }
            for count in [direct, virtual_] {
                let mut method_idx = 0u32;
                for _ in 0..count {
                    method_idx = method_idx.wrapping_add(c.uleb(&mut p)?);
                    let access_flags = c.uleb(&mut p)?;
                    let code_off = c.uleb(&mut p)? as usize;
                    if method_idx as usize >= methods.len() {
                        return Err(DexError::IndexOutOfRange { table: "method", index: method_idx });
                    }
                    let code = if code_off == 0 {
                        None
                    } else {
                        let registers = c.u16(code_off)?;
                        let insns_size = c.u32(code_off + 12)? as usize;
                        let raw = c.bytes(code_off + 16, insns_size * 2)?;
                        let insns = raw.chunks_exact(2).map(|u| u16::from_le_bytes([u[0], u[1]])).collect();
                        Some(CodeItem { registers, insns })
                    };
                    class_methods.push(EncodedMethod { method_idx, access_flags, code });
                }
            }
        }
        classes.push(ClassDef {
            descriptor: checked_ty(c.u32(at)?)?,
            superclass: if super_idx == NO_INDEX { None } else { Some(checked_ty(super_idx)?) },
            access_flags: c.u32(at + 4)?,
            methods: class_methods,
        });
    }

    Ok(DexFile { strings, types, fields, methods, classes })
}

/// One reference found while walking a method body.
enum CodeRef {
    Invoke(u32, InvokeKind),
    FieldRead(u32),
}

fn scan_code(method: &MethodRef, insns: &[u16], mut visit: impl FnMut(CodeRef)) -> Result<(), DexError> {
    let overrun = |at| DexError::MalformedCode { method: alloc::format!("{method}"), at };
    let mut at = 0;
    while at < insns.len() {
        let unit = insns[at];
        let op = (unit & 0xff) as u8;
        let w = if op == 0x00 {
            match opcodes::payload_width(insns, at) {
                Some(Some(w)) => w,
                Some(None) => return Err(overrun(at)),
                None => 1,
            }
        } else {
            opcodes::width(op)
        };
        if at + w > insns.len() {
            return Err(overrun(at));
        }
        if let Some(kind) = opcodes::invoke_kind(op) {
            visit(CodeRef::Invoke(insns[at + 1] as u32, kind));
        } else if opcodes::is_field_read(op) {
            visit(CodeRef::FieldRead(insns[at + 1] as u32));
        }
        at += w;
    }
    Ok(())
}

impl DexFile {
    /// Every method with a body, in class-definition order.
    pub fn defined_methods(&self) -> impl Iterator<Item = (&MethodRef, &EncodedMethod)> {
        self.classes
            .iter()
            .flat_map(|c| c.methods.iter())
            .map(|m| (&self.methods[m.method_idx as usize], m))
    }

    fn walk(&self, mut on_invoke: impl FnMut(Invocation), mut on_read: impl FnMut(FieldRead)) -> Result<(), DexError> {
        for (caller, m) in self.defined_methods() {
            let Some(code) = m.code.as_ref().filter(|_| !m.is_abstract_or_native()) else {
                continue;
            };
            let mut bad = None;
            scan_code(caller, &code.insns, |r| match r {
                CodeRef::Invoke(idx, kind) => match self.methods.get(idx as usize) {
                    Some(callee) => on_invoke(Invocation { caller: caller.clone(), callee: callee.clone(), kind }),
                    None => bad = Some(DexError::IndexOutOfRange { table: "method", index: idx }),
                },
                CodeRef::FieldRead(idx) => match self.fields.get(idx as usize) {
                    Some(field) => on_read(FieldRead { method: caller.clone(), field: field.clone() }),
                    None => bad = Some(DexError::IndexOutOfRange { table: "field", index: idx }),
                },
            })?;
            if let Some(e) = bad {
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn invocations(&self) -> Result<Vec<Invocation>, DexError> {
        let mut out = Vec::new();
        self.walk(|i| out.push(i), |_| {})?;
        Ok(out)
    }

    pub fn field_reads(&self) -> Result<Vec<FieldRead>, DexError> {
        let mut out = Vec::new();
        self.walk(|_| {}, |r| out.push(r))?;
        Ok(out)
    }
}

/// Invoke records across all files, in file order.
pub fn extract_invocations(dex_files: &[DexFile]) -> Result<Vec<Invocation>, DexError> {
    let mut out = Vec::new();
    for d in dex_files {
        out.extend(d.invocations()?);
    }
    Ok(out)
}

pub fn extract_field_reads(dex_files: &[DexFile]) -> Result<Vec<FieldRead>, DexError> {
    let mut out = Vec::new();
    for d in dex_files {
        out.extend(d.field_reads()?);
    }
    Ok(out)
}

/// Methods with bytecode bodies across all files.
pub fn defined_methods(dex_files: &[DexFile]) -> Vec<MethodRef> {
    dex_files
        .iter()
        .flat_map(|d| d.defined_methods().filter(|(_, m)| m.code.is_some()).map(|(r, _)| r.clone()))
        .collect()
}

/// Whether any file references a `java.lang.reflect` method.
pub fn uses_reflection(dex_files: &[DexFile]) -> bool {
    dex_files
        .iter()
        .flat_map(|d| d.methods.iter())
        .any(|m| m.class_descriptor.starts_with("Ljava/lang/reflect/"))
}

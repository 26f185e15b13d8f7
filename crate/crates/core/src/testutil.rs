//! Small writers for building test inputs.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use std::io::Write;

pub struct ZipBuilder {
    local: Vec<u8>,
    central: Vec<u8>,
    count: u16,
}

impl ZipBuilder {
    pub fn new() -> Self {
        ZipBuilder { local: Vec::new(), central: Vec::new(), count: 0 }
    }

    pub fn stored(self, name: &str, data: &[u8]) -> Self {
        self.raw(name, data, data, 0)
    }

    pub fn deflated(self, name: &str, data: &[u8]) -> Self {
        let mut enc = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(data).unwrap();
        let packed = enc.finish().unwrap();
        self.raw(name, data, &packed, 8)
    }

    pub fn with_method(self, name: &str, data: &[u8], method: u16) -> Self {
        self.raw(name, data, data, method)
    }

    fn raw(mut self, name: &str, plain: &[u8], packed: &[u8], method: u16) -> Self {
        let crc = crc32fast::hash(plain);
        let offset = self.local.len() as u32;
        let l = &mut self.local;
        l.extend_from_slice(&0x0403_4b50u32.to_le_bytes());
        l.extend_from_slice(&20u16.to_le_bytes());
        l.extend_from_slice(&0u16.to_le_bytes());
        l.extend_from_slice(&method.to_le_bytes());
        l.extend_from_slice(&[0; 4]);
        l.extend_from_slice(&crc.to_le_bytes());
        l.extend_from_slice(&(packed.len() as u32).to_le_bytes());
        l.extend_from_slice(&(plain.len() as u32).to_le_bytes());
        l.extend_from_slice(&(name.len() as u16).to_le_bytes());
        l.extend_from_slice(&0u16.to_le_bytes());
        l.extend_from_slice(name.as_bytes());
        l.extend_from_slice(packed);

        let c = &mut self.central;
        c.extend_from_slice(&0x0201_4b50u32.to_le_bytes());
        c.extend_from_slice(&20u16.to_le_bytes());
        c.extend_from_slice(&20u16.to_le_bytes());
        c.extend_from_slice(&0u16.to_le_bytes());
        c.extend_from_slice(&method.to_le_bytes());
        c.extend_from_slice(&[0; 4]);
        c.extend_from_slice(&crc.to_le_bytes());
        c.extend_from_slice(&(packed.len() as u32).to_le_bytes());
        c.extend_from_slice(&(plain.len() as u32).to_le_bytes());
        c.extend_from_slice(&(name.len() as u16).to_le_bytes());
        c.extend_from_slice(&[0; 12]);
        c.extend_from_slice(&offset.to_le_bytes());
        c.extend_from_slice(name.as_bytes());
        self.count += 1;
        self
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = self.local;
        let cd_offset = out.len() as u32;
        out.extend_from_slice(&self.central);
        out.extend_from_slice(&0x0605_4b50u32.to_le_bytes());
        out.extend_from_slice(&[0; 4]);
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&(self.central.len() as u32).to_le_bytes());
        out.extend_from_slice(&cd_offset.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out
    }
}

#[derive(Clone)]
pub enum Val {
    Str(&'static str),
    Int(i32),
    Bool(bool),
    Ref(u32),
}

#[derive(Clone)]
pub struct El {
    pub name: &'static str,
    pub attrs: Vec<(bool, &'static str, Val)>,
    pub children: Vec<El>,
}

pub fn el(name: &'static str, attrs: Vec<(bool, &'static str, Val)>, children: Vec<El>) -> El {
    El { name, attrs, children }
}

/// `android:name="value"`
pub fn an(value: &'static str) -> (bool, &'static str, Val) {
    (true, "name", Val::Str(value))
}

fn attr_id(name: &str) -> u32 {
    match name {
        "name" => 0x0101_0003,
        "minSdkVersion" => 0x0101_020c,
        "targetSdkVersion" => 0x0101_0270,
        "versionCode" => 0x0101_021b,
        "targetActivity" => 0x0101_0202,
        _ => 0x0101_0000,
    }
}

const NS_URI: &str = "http://schemas.android.com/apk/res/android";

/// Encodes a binary XML document with a UTF-16 string pool.
pub fn axml(root: &El) -> Vec<u8> {
    let mut res_names: Vec<String> = Vec::new();
    fn walk_attrs(e: &El, out: &mut Vec<String>) {
        for (android, n, _) in &e.attrs {
            if *android && !out.iter().any(|x| x == n) {
                out.push(n.to_string());
            }
        }
        for c in &e.children {
            walk_attrs(c, out);
        }
    }
    walk_attrs(root, &mut res_names);
    let mut strings = res_names.clone();
    let mut intern = |s: &str, strings: &mut Vec<String>| -> u32 {
        if let Some(i) = strings.iter().position(|x| x == s) {
            return i as u32;
        }
        strings.push(s.to_string());
        (strings.len() - 1) as u32
    };
    intern("android", &mut strings);
    intern(NS_URI, &mut strings);
    fn walk_rest(e: &El, strings: &mut Vec<String>, intern: &mut dyn FnMut(&str, &mut Vec<String>) -> u32) {
        intern(e.name, strings);
        for (_, n, v) in &e.attrs {
            intern(n, strings);
            if let Val::Str(s) = v {
                intern(s, strings);
            }
        }
        for c in &e.children {
            walk_rest(c, strings, intern);
        }
    }
    walk_rest(root, &mut strings, &mut intern);
    let idx = |s: &str| strings.iter().position(|x| x == s).unwrap() as u32;

    let mut body = Vec::new();
    // string pool
    let mut data = Vec::new();
    let mut offsets = Vec::new();
    for s in &strings {
        offsets.push(data.len() as u32);
        let units: Vec<u16> = s.encode_utf16().collect();
        data.extend_from_slice(&(units.len() as u16).to_le_bytes());
        for u in units {
            data.extend_from_slice(&u.to_le_bytes());
        }
        data.extend_from_slice(&[0, 0]);
    }
    while data.len() % 4 != 0 {
        data.push(0);
    }
    let header = 28u32;
    let size = header + 4 * strings.len() as u32 + data.len() as u32;
    push16(&mut body, 0x0001);
    push16(&mut body, 28);
    push32(&mut body, size);
    push32(&mut body, strings.len() as u32);
    push32(&mut body, 0);
    push32(&mut body, 0);
    push32(&mut body, header + 4 * strings.len() as u32);
    push32(&mut body, 0);
    for o in offsets {
        push32(&mut body, o);
    }
    body.extend_from_slice(&data);
    // resource map
    push16(&mut body, 0x0180);
    push16(&mut body, 8);
    push32(&mut body, 8 + 4 * res_names.len() as u32);
    for n in &res_names {
        push32(&mut body, attr_id(n));
    }
    node(&mut body, 0x0100, 24);
    push32(&mut body, idx("android"));
    push32(&mut body, idx(NS_URI));

    fn emit(e: &El, body: &mut Vec<u8>, idx: &dyn Fn(&str) -> u32) {
        let mut ext = Vec::new();
        push32(&mut ext, u32::MAX);
        push32(&mut ext, idx(e.name));
        push16(&mut ext, 20);
        push16(&mut ext, 20);
        push16(&mut ext, e.attrs.len() as u16);
        push16(&mut ext, 0);
        push16(&mut ext, 0);
        push16(&mut ext, 0);
        for (android, n, v) in &e.attrs {
            push32(&mut ext, if *android { idx(NS_URI) } else { u32::MAX });
            push32(&mut ext, idx(n));
            let (raw, ty, data) = match v {
                Val::Str(s) => (idx(s), 0x03u8, idx(s)),
                Val::Int(i) => (u32::MAX, 0x10, *i as u32),
                Val::Bool(b) => (u32::MAX, 0x12, if *b { u32::MAX } else { 0 }),
                Val::Ref(r) => (u32::MAX, 0x01, *r),
            };
            push32(&mut ext, raw);
            push16(&mut ext, 8);
            ext.push(0);
            ext.push(ty);
            push32(&mut ext, data);
        }
        node(body, 0x0102, 16 + ext.len() as u32);
        body.extend_from_slice(&ext);
        for c in &e.children {
            emit(c, body, idx);
        }
        node(body, 0x0103, 24);
        push32(body, u32::MAX);
        push32(body, idx(e.name));
    }
    emit(root, &mut body, &idx);
    node(&mut body, 0x0101, 24);
    push32(&mut body, idx("android"));
    push32(&mut body, idx(NS_URI));

    let mut out = vec![];
    push16(&mut out, 0x0003);
    push16(&mut out, 8);
    push32(&mut out, 8 + body.len() as u32);
    out.extend_from_slice(&body);
    out
}

fn node(body: &mut Vec<u8>, kind: u16, size: u32) {
    push16(body, kind);
    push16(body, 16);
    push32(body, size);
    push32(body, 1);
    push32(body, u32::MAX);
}

fn push16(v: &mut Vec<u8>, x: u16) {
    v.extend_from_slice(&x.to_le_bytes());
}

fn push32(v: &mut Vec<u8>, x: u32) {
    v.extend_from_slice(&x.to_le_bytes());
}

/// Reads a shared fixture APK from the workspace `fixtures/apks` directory.
pub fn fixture_apk(name: &str) -> Vec<u8> {
    let path = std::format!("{}/../../fixtures/apks/{}.apk", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Decompressed `(name, bytes)` dex entries of a fixture APK.
pub fn fixture_dex(name: &str) -> Vec<(String, Vec<u8>)> {
    let apk = fixture_apk(name);
    let archive = crate::apk::open_archive(&apk).unwrap();
    crate::apk::extract_bundle(&archive).unwrap().dex_entries
}

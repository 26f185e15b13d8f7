#!/usr/bin/env python3
"""Writes the synthetic APK fixtures used by the parser and audit tests.

The binary manifest and DEX writers here are deliberately standalone: they
share no code with the Rust decoders. Golden dumps are produced separately by
dump_reference.py using androguard.

Regenerate with:
    python3 fixtures/tools/gen_fixtures.py fixtures/apks
    python3 fixtures/tools/dump_reference.py fixtures/apks fixtures/golden

Usage: gen_fixtures.py <out_dir>
"""

import hashlib
import struct
import sys
import zipfile
import zlib
from pathlib import Path

ANDROID_NS = "http://schemas.android.com/apk/res/android"

# Framework attribute resource ids.
ATTR_IDS = {
    "name": 0x01010003,
    "exported": 0x01010010,
    "targetActivity": 0x01010202,
    "versionCode": 0x0101021B,
    "versionName": 0x0101021C,
    "minSdkVersion": 0x0101020C,
    "targetSdkVersion": 0x01010270,
    "maxSdkVersion": 0x01010271,
    "label": 0x01010001,
}

T_REF, T_STRING, T_INT, T_BOOL = 0x01, 0x03, 0x10, 0x12


# ---------------------------------------------------------------------------
# binary XML


class Elem:
    def __init__(self, name, attrs=None, children=None):
        self.name = name
        # attrs: list of (is_android_ns, name, kind, value)
        self.attrs = attrs or []
        self.children = children or []


def a_str(name, value, android=True):
    return (android, name, T_STRING, value)


def a_int(name, value, android=True):
    return (android, name, T_INT, value)


def a_bool(name, value, android=True):
    return (android, name, T_BOOL, value)


def a_ref(name, value, android=True):
    return (android, name, T_REF, value)


def encode_string_pool(strings, utf8):
    offsets = []
    data = bytearray()
    for s in strings:
        offsets.append(len(data))
        if utf8:
            raw = s.encode("utf-8")
            n16 = len(s.encode("utf-16-le")) // 2
            for n in (n16, len(raw)):
                if n > 0x7F:
                    data += bytes([0x80 | (n >> 8), n & 0xFF])
                else:
                    data += bytes([n])
            data += raw + b"\x00"
        else:
            raw = s.encode("utf-16-le")
            n = len(raw) // 2
            if n > 0x7FFF:
                data += struct.pack("<HH", 0x8000 | (n >> 16), n & 0xFFFF)
            else:
                data += struct.pack("<H", n)
            data += raw + b"\x00\x00"
    while len(data) % 4:
        data += b"\x00"
    header_size = 28
    strings_start = header_size + 4 * len(strings)
    flags = 0x100 if utf8 else 0
    body = b"".join(struct.pack("<I", o) for o in offsets) + bytes(data)
    chunk_size = header_size + len(body)
    return (
        struct.pack("<HHIIIIII", 0x0001, header_size, chunk_size, len(strings), 0, flags, strings_start, 0)
        + body
    )


def encode_axml(root, utf8=False):
    # Android-namespace attribute names come first so they line up with the
    # resource map, as aapt lays them out.
    attr_names = []

    def walk_attrs(e):
        for android, name, _, _ in e.attrs:
            if android and name not in attr_names:
                attr_names.append(name)
        for c in e.children:
            walk_attrs(c)

    walk_attrs(root)
    strings = list(attr_names)

    def intern(s):
        if s not in strings:
            strings.append(s)
        return strings.index(s)

    intern("android")
    intern(ANDROID_NS)

    def walk_rest(e):
        intern(e.name)
        for android, name, kind, value in e.attrs:
            intern(name)
            if kind == T_STRING:
                intern(value)
        for c in e.children:
            walk_rest(c)

    walk_rest(root)

    out = bytearray()
    out += encode_string_pool(strings, utf8)
    res_ids = [ATTR_IDS[n] for n in attr_names]
    out += struct.pack("<HHI", 0x0180, 8, 8 + 4 * len(res_ids))
    out += b"".join(struct.pack("<I", r) for r in res_ids)

    line = [1]

    def node_header(kind, size):
        line[0] += 1
        return struct.pack("<HHIII", kind, 16, size, line[0], 0xFFFFFFFF)

    prefix_idx = strings.index("android")
    uri_idx = strings.index(ANDROID_NS)
    out += node_header(0x0100, 24) + struct.pack("<II", prefix_idx, uri_idx)

    def emit(e):
        attrs = sorted(
            e.attrs,
            key=lambda a: (ATTR_IDS.get(a[1], 0xFFFFFFFF) if a[0] else 0xFFFFFFFF, a[1]),
        )
        body = bytearray()
        body += struct.pack("<IIHHHHHH", 0xFFFFFFFF, strings.index(e.name), 20, 20, len(attrs), 0, 0, 0)
        for android, name, kind, value in attrs:
            ns = uri_idx if android else 0xFFFFFFFF
            if kind == T_STRING:
                raw = strings.index(value)
                data = raw
            elif kind == T_BOOL:
                raw = 0xFFFFFFFF
                data = 0xFFFFFFFF if value else 0
            else:
                raw = 0xFFFFFFFF
                data = value & 0xFFFFFFFF
            body += struct.pack("<IIIHBBI", ns, strings.index(name), raw, 8, 0, kind, data)
        out.extend(node_header(0x0102, 16 + len(body)) + body)
        for c in e.children:
            emit(c)
        out.extend(node_header(0x0103, 24) + struct.pack("<II", 0xFFFFFFFF, strings.index(e.name)))

    emit(root)
    out += node_header(0x0101, 24) + struct.pack("<II", prefix_idx, uri_idx)
    return struct.pack("<HHI", 0x0003, 8, 8 + len(out)) + bytes(out)


# ---------------------------------------------------------------------------
# DEX


def uleb(n):
    out = bytearray()
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def mutf8(s):
    out = bytearray()
    for ch in s:
        c = ord(ch)
        if c == 0:
            out += b"\xc0\x80"
        elif c < 0x80:
            out.append(c)
        elif c < 0x800:
            out += bytes([0xC0 | (c >> 6), 0x80 | (c & 0x3F)])
        elif c < 0x10000:
            out += bytes([0xE0 | (c >> 12), 0x80 | ((c >> 6) & 0x3F), 0x80 | (c & 0x3F)])
        else:
            c -= 0x10000
            for u in (0xD800 | (c >> 10), 0xDC00 | (c & 0x3FF)):
                out += bytes([0xE0 | (u >> 12), 0x80 | ((u >> 6) & 0x3F), 0x80 | (u & 0x3F)])
    return bytes(out)


def utf16_key(s):
    return s.encode("utf-16-be")


def shorty_char(desc):
    return "L" if desc[0] in "L[" else desc[0]


class M:
    """Method reference: class descriptor, name, return descriptor, params."""

    def __init__(self, cls, name, ret, params=()):
        self.cls, self.name, self.ret, self.params = cls, name, ret, tuple(params)

    def key(self):
        return (self.cls, self.name, self.ret, self.params)


class F:
    def __init__(self, cls, name, typ):
        self.cls, self.name, self.typ = cls, name, typ

    def key(self):
        return (self.cls, self.name, self.typ)


class Method:
    def __init__(self, ref, flags, code=None, registers=4, ins=1, outs=3):
        self.ref, self.flags, self.code = ref, flags, code
        self.registers, self.ins, self.outs = registers, ins, outs


class ClassDef:
    def __init__(self, name, flags, superclass, methods):
        self.name, self.flags, self.superclass, self.methods = name, flags, superclass, methods


ACC_PUBLIC, ACC_PRIVATE, ACC_STATIC, ACC_ABSTRACT, ACC_NATIVE, ACC_CONSTRUCTOR = (
    0x1,
    0x2,
    0x8,
    0x400,
    0x100,
    0x10000,
)

INVOKE_OPS = {
    "virtual": 0x6E,
    "super": 0x6F,
    "direct": 0x70,
    "static": 0x71,
    "interface": 0x72,
}


def build_dex(classes, extra_strings=()):
    strings, types, protos, fields, methods = set(), set(), set(), set(), set()

    def add_type(t):
        types.add(t)
        strings.add(t)

    def add_method(m):
        add_type(m.cls)
        add_type(m.ret)
        for p in m.params:
            add_type(p)
        strings.add(m.name)
        shorty = shorty_char(m.ret) + "".join(shorty_char(p) for p in m.params)
        strings.add(shorty)
        protos.add((shorty, m.ret, m.params))
        methods.add(m.key())

    def add_field(f):
        add_type(f.cls)
        add_type(f.typ)
        strings.add(f.name)
        fields.add(f.key())

    for c in classes:
        add_type(c.name)
        if c.superclass:
            add_type(c.superclass)
        for m in c.methods:
            add_method(m.ref)
            for ins in m.code or ():
                op = ins[0]
                if op.startswith("invoke"):
                    add_method(ins[1])
                elif op in ("sget-object",):
                    add_field(ins[2])
                elif op in ("const-string",):
                    strings.add(ins[2])
                elif op in ("new-instance",):
                    add_type(ins[2])
    for s in extra_strings:
        strings.add(s)

    string_list = sorted(strings, key=utf16_key)
    sidx = {s: i for i, s in enumerate(string_list)}
    type_list = sorted(types, key=lambda t: sidx[t])
    tidx = {t: i for i, t in enumerate(type_list)}
    proto_list = sorted(protos, key=lambda p: (tidx[p[1]], [tidx[x] for x in p[2]]))
    pidx = {(p[1], p[2]): i for i, p in enumerate(proto_list)}
    field_list = sorted(fields, key=lambda f: (tidx[f[0]], sidx[f[1]], tidx[f[2]]))
    fidx = {f: i for i, f in enumerate(field_list)}
    method_list = sorted(methods, key=lambda m: (tidx[m[0]], sidx[m[1]], pidx[(m[2], m[3])]))
    midx = {m: i for i, m in enumerate(method_list)}

    def assemble(code):
        units = []
        payloads = []
        for ins in code:
            op = ins[0]
            if op == "nop":
                units.append(0x0000)
            elif op == "return-void":
                units.append(0x000E)
            elif op == "return-object":
                units.append(0x11 | (ins[1] << 8))
            elif op == "const/4":
                units.append(0x12 | (ins[1] << 8) | ((ins[2] & 0xF) << 12))
            elif op == "move-result-object":
                units.append(0x0C | (ins[1] << 8))
            elif op == "const-string":
                units += [0x1A | (ins[1] << 8), sidx[ins[2]]]
            elif op == "const-wide":
                v = ins[2] & 0xFFFFFFFFFFFFFFFF
                units += [0x18 | (ins[1] << 8)] + [(v >> (16 * k)) & 0xFFFF for k in range(4)]
            elif op == "sget-object":
                units += [0x62 | (ins[1] << 8), fidx[ins[2].key()]]
            elif op == "new-instance":
                units += [0x22 | (ins[1] << 8), tidx[ins[2]]]
            elif op == "goto":
                units.append(0x28 | ((ins[1] & 0xFF) << 8))
            elif op == "if-eqz":
                units += [0x38 | (ins[1] << 8), ins[2] & 0xFFFF]
            elif op in ("packed-switch", "fill-array-data", "sparse-switch"):
                opcode = {"packed-switch": 0x2B, "sparse-switch": 0x2C, "fill-array-data": 0x26}[op]
                at = len(units)
                units += [opcode | (ins[1] << 8), 0, 0]
                payloads.append((at, op, ins[2]))
            elif op.startswith("invoke-") and op.endswith("/range"):
                kind = op[len("invoke-"):-len("/range")]
                regs = ins[2]
                units += [(INVOKE_OPS[kind] + 6) | (len(regs) << 8), midx[ins[1].key()], regs[0]]
            elif op.startswith("invoke-"):
                kind = op[len("invoke-"):]
                regs = list(ins[2]) + [0] * (5 - len(ins[2]))
                a = len(ins[2])
                units += [
                    INVOKE_OPS[kind] | (regs[4] << 8) | (a << 12),
                    midx[ins[1].key()],
                    regs[0] | (regs[1] << 4) | (regs[2] << 8) | (regs[3] << 12),
                ]
            else:
                raise ValueError(op)
        for at, op, data in payloads:
            if len(units) % 2:
                units.append(0x0000)
            off = len(units) - at
            units[at + 1] = off & 0xFFFF
            units[at + 2] = (off >> 16) & 0xFFFF
            if op == "packed-switch":
                units += [0x0100, len(data)] + list(struct.unpack("<2H", struct.pack("<i", 0)))
                for t in data:
                    units += list(struct.unpack("<2H", struct.pack("<i", t)))
            elif op == "sparse-switch":
                units += [0x0200, len(data)]
                for k, _ in data:
                    units += list(struct.unpack("<2H", struct.pack("<i", k)))
                for _, t in data:
                    units += list(struct.unpack("<2H", struct.pack("<i", t)))
            else:
                width, items = data
                raw = b"".join(v.to_bytes(width, "little") for v in items)
                if len(raw) % 2:
                    raw += b"\x00"
                units += [0x0300, width] + list(struct.unpack("<2H", struct.pack("<I", len(items))))
                units += list(struct.unpack("<%dH" % (len(raw) // 2), raw))
        return units

    # Layout.
    header_size = 0x70
    off = header_size
    string_ids_off = off
    off += 4 * len(string_list)
    type_ids_off = off
    off += 4 * len(type_list)
    proto_ids_off = off
    off += 12 * len(proto_list)
    field_ids_off = off if field_list else 0
    off += 8 * len(field_list)
    method_ids_off = off
    off += 8 * len(method_list)
    class_defs_off = off
    off += 32 * len(classes)
    data_off = off

    data = bytearray()

    def pos():
        return data_off + len(data)

    def align4():
        while pos() % 4:
            data.append(0)

    map_items = []

    # type lists
    align4()
    tl_offsets = {}
    tl_start = pos()
    for p in proto_list:
        params = p[2]
        if params and params not in tl_offsets:
            align4()
            tl_offsets[params] = pos()
            data.extend(struct.pack("<I", len(params)))
            for t in params:
                data.extend(struct.pack("<H", tidx[t]))
    if tl_offsets:
        map_items.append((0x1001, len(tl_offsets), tl_start))

    # code items
    align4()
    code_offsets = {}
    code_start = pos()
    n_code = 0
    for c in classes:
        for m in c.methods:
            if m.code is None:
                continue
            align4()
            units = assemble(m.code)
            code_offsets[m.ref.key()] = pos()
            data.extend(struct.pack("<HHHHII", m.registers, m.ins, m.outs, 0, 0, len(units)))
            data.extend(struct.pack("<%dH" % len(units), *units))
            n_code += 1
    if n_code:
        map_items.append((0x2001, n_code, code_start))

    # class data
    cd_offsets = {}
    cd_start = pos()
    for c in classes:
        direct = sorted(
            [m for m in c.methods if m.flags & (ACC_STATIC | ACC_PRIVATE | ACC_CONSTRUCTOR)],
            key=lambda m: midx[m.ref.key()],
        )
        virtual = sorted(
            [m for m in c.methods if not m.flags & (ACC_STATIC | ACC_PRIVATE | ACC_CONSTRUCTOR)],
            key=lambda m: midx[m.ref.key()],
        )
        cd_offsets[c.name] = pos()
        data.extend(uleb(0) + uleb(0) + uleb(len(direct)) + uleb(len(virtual)))
        for group in (direct, virtual):
            prev = 0
            for m in group:
                i = midx[m.ref.key()]
                data.extend(uleb(i - prev) + uleb(m.flags) + uleb(code_offsets.get(m.ref.key(), 0)))
                prev = i
    map_items.append((0x2000, len(classes), cd_start))

    # string data
    sd_start = pos()
    sd_offsets = []
    for s in string_list:
        sd_offsets.append(pos())
        data.extend(uleb(len(s.encode("utf-16-le")) // 2) + mutf8(s) + b"\x00")
    map_items.append((0x2002, len(string_list), sd_start))

    align4()
    map_off = pos()
    items = [
        (0x0000, 1, 0),
        (0x0001, len(string_list), string_ids_off),
        (0x0002, len(type_list), type_ids_off),
        (0x0003, len(proto_list), proto_ids_off),
    ]
    if field_list:
        items.append((0x0004, len(field_list), field_ids_off))
    items += [
        (0x0005, len(method_list), method_ids_off),
        (0x0006, len(classes), class_defs_off),
    ]
    items += sorted(map_items, key=lambda x: x[2])
    items.append((0x1000, 1, map_off))
    data.extend(struct.pack("<I", len(items)))
    for t, n, o in items:
        data.extend(struct.pack("<HHII", t, 0, n, o))

    body = bytearray()
    for o in sd_offsets:
        body += struct.pack("<I", o)
    for t in type_list:
        body += struct.pack("<I", sidx[t])
    for shorty, ret, params in proto_list:
        body += struct.pack("<III", sidx[shorty], tidx[ret], tl_offsets.get(params, 0) if params else 0)
    for cls, name, typ in field_list:
        body += struct.pack("<HHI", tidx[cls], tidx[typ], sidx[name])
    for cls, name, ret, params in method_list:
        body += struct.pack("<HHI", tidx[cls], pidx[(ret, params)], sidx[name])
    for c in classes:
        body += struct.pack(
            "<IIIIIIII",
            tidx[c.name],
            c.flags,
            tidx[c.superclass] if c.superclass else 0xFFFFFFFF,
            0,
            0xFFFFFFFF,
            0,
            cd_offsets[c.name],
            0,
        )
    assert header_size + len(body) == data_off
    file_size = data_off + len(data)
    header = bytearray(b"dex\n035\x00" + b"\x00" * 24)
    header += struct.pack(
        "<IIIIIIIIIIIIIIIIIIII",
        file_size,
        header_size,
        0x12345678,
        0,
        0,
        map_off,
        len(string_list),
        string_ids_off,
        len(type_list),
        type_ids_off,
        len(proto_list),
        proto_ids_off,
        len(field_list),
        field_ids_off,
        len(method_list),
        method_ids_off,
        len(classes),
        class_defs_off,
        len(data),
        data_off,
    )
    # The header is 0x70 bytes; the packed fields above cover 0x20..0x70.
    assert len(header) == header_size, len(header)
    raw = bytearray(header + body + data)
    raw[12:32] = hashlib.sha1(raw[32:]).digest()
    raw[8:12] = struct.pack("<I", zlib.adler32(bytes(raw[12:])) & 0xFFFFFFFF)
    return bytes(raw)


# ---------------------------------------------------------------------------
# app model

OBJ = "Ljava/lang/Object;"
STR = "Ljava/lang/String;"
CTX = "Landroid/content/Context;"
CR = "Landroid/content/ContentResolver;"
URI = "Landroid/net/Uri;"
CURSOR = "Landroid/database/Cursor;"
ACTIVITY = "Landroid/app/Activity;"
BUNDLE = "Landroid/os/Bundle;"

GET_CR = M(CTX, "getContentResolver", CR)
QUERY = M(CR, "query", CURSOR, [URI, "[Ljava/lang/String;", STR, "[Ljava/lang/String;", STR])
URL_INIT = M("Ljava/net/URL;", "<init>", "V", [STR])
URL_OPEN = M("Ljava/net/URL;", "openConnection", "Ljava/net/URLConnection;")
HUC_IN = M("Ljava/net/HttpURLConnection;", "getInputStream", "Ljava/io/InputStream;")
OK_NEWCALL = M("Lokhttp3/OkHttpClient;", "newCall", "Lokhttp3/Call;", ["Lokhttp3/Request;"])
RETROFIT_CREATE = M("Lretrofit2/Retrofit;", "create", OBJ, ["Ljava/lang/Class;"])
OKGO_POST = M("Lcom/lzy/okgo/OkGo;", "post", "Lcom/lzy/okgo/request/PostRequest;", [STR])
LOC_LAST = M("Landroid/location/LocationManager;", "getLastKnownLocation", "Landroid/location/Location;", [STR])
PM_INSTALLED = M("Landroid/content/pm/PackageManager;", "getInstalledPackages", "Ljava/util/List;", ["I"])
CTX_PM = M(CTX, "getPackageManager", "Landroid/content/pm/PackageManager;")
TM_LINE1 = M("Landroid/telephony/TelephonyManager;", "getLine1Number", STR)
TM_SIM = M("Landroid/telephony/TelephonyManager;", "getSimSerialNumber", STR)
SMS_SEND = M("Landroid/telephony/SmsManager;", "sendTextMessage", "V", [STR, STR, STR, "Landroid/app/PendingIntent;", "Landroid/app/PendingIntent;"])
REFLECT_INVOKE = M("Ljava/lang/reflect/Method;", "invoke", OBJ, [OBJ, "[Ljava/lang/Object;"])
ACT_ONCREATE = M(ACTIVITY, "onCreate", "V", [BUNDLE])
ACT_INIT = M(ACTIVITY, "<init>", "V")
OBJ_INIT = M(OBJ, "<init>", "V")
MEDIA_URI = F("Landroid/provider/MediaStore$Images$Media;", "EXTERNAL_CONTENT_URI", URI)
CONTACTS_URI = F("Landroid/provider/ContactsContract$Contacts;", "CONTENT_URI", URI)
CALLS_URI = F("Landroid/provider/CallLog$Calls;", "CONTENT_URI", URI)
SMS_URI = F("Landroid/provider/Telephony$Sms;", "CONTENT_URI", URI)

SOURCES = {
    "contacts": [("sget-object", 1, CONTACTS_URI)],
    "call_log": [("sget-object", 1, CALLS_URI)],
    "sms": [("sget-object", 1, SMS_URI)],
    "media": [("sget-object", 1, MEDIA_URI)],
}

SINKS = {
    "urlconnection": [
        ("new-instance", 0, "Ljava/net/URL;"),
        ("const-string", 1, "https://collect.example.net/upload"),
        ("invoke-direct", URL_INIT, [0, 1]),
        ("invoke-virtual", URL_OPEN, [0]),
        ("move-result-object", 0),
    ],
    "okhttp": [("invoke-virtual", OK_NEWCALL, [0, 1]), ("move-result-object", 0)],
    "retrofit": [("invoke-virtual", RETROFIT_CREATE, [0, 1]), ("move-result-object", 0)],
    "okgo": [("const-string", 1, "https://api.example.org/v1"), ("invoke-static", OKGO_POST, [1])],
    "stream": [("invoke-virtual", HUC_IN, [0]), ("move-result-object", 0)],
}


def app_classes(pkg, cfg):
    base = "L" + pkg.replace(".", "/") + "/"
    main = base + "MainActivity;"
    reader = base + "DataReader;"
    uploader = base + "Uploader;"
    helper = base + "Helper;"
    read = M(reader, "collect", "V", [CTX])
    send = M(uploader, "send", "V", [STR])
    help_m = M(helper, "relay", "V", [STR])
    classes = []

    oncreate_code = [
        ("invoke-super", ACT_ONCREATE, [2, 3]),
        ("invoke-static", read, [2]),
    ]
    if cfg.get("launcher_location"):
        oncreate_code += [("const-string", 0, "gps"), ("invoke-virtual", LOC_LAST, [1, 0]), ("move-result-object", 0)]
        oncreate_code += [("invoke-static", send, [0])]
    if cfg.get("switch"):
        oncreate_code += [("const/4", 0, 1), ("packed-switch", 0, [3, 4]), ("nop",), ("nop",)]
    if cfg.get("array"):
        oncreate_code += [("fill-array-data", 0, (4, [1, 2, 3])), ("const-wide", 0, -5)]
    oncreate_code += [("return-void",)]
    classes.append(
        ClassDef(
            main,
            ACC_PUBLIC,
            ACTIVITY,
            [
                Method(M(main, "<init>", "V"), ACC_PUBLIC | ACC_CONSTRUCTOR, [("invoke-direct", ACT_INIT, [0]), ("return-void",)], 1, 1, 1),
                Method(M(main, "onCreate", "V", [BUNDLE]), ACC_PUBLIC, oncreate_code, 4, 2, 2),
            ],
        )
    )

    collect_code = [("invoke-virtual", GET_CR, [3]), ("move-result-object", 0)]
    for src in cfg.get("sources", []):
        if src in SOURCES:
            collect_code += SOURCES[src]
            collect_code += [("invoke-virtual/range", QUERY, [0, 1, 2, 3, 4, 5]), ("move-result-object", 0)]
        elif src == "location":
            collect_code += [("const-string", 1, "network"), ("invoke-virtual", LOC_LAST, [0, 1]), ("move-result-object", 0)]
        elif src == "packages":
            collect_code += [("invoke-virtual", CTX_PM, [3]), ("move-result-object", 0), ("const/4", 1, 0), ("invoke-virtual", PM_INSTALLED, [0, 1]), ("move-result-object", 0)]
        elif src == "identifiers":
            collect_code += [("invoke-virtual", TM_LINE1, [0]), ("move-result-object", 0), ("invoke-virtual", TM_SIM, [0]), ("move-result-object", 0)]
        elif src == "sms_send":
            collect_code += [("invoke-virtual", SMS_SEND, [0, 1, 1, 1, 1])]
    if cfg.get("sink_in_reader"):
        collect_code += SINKS[cfg["sink_in_reader"]]
    if cfg.get("reflection"):
        collect_code += [("invoke-virtual", REFLECT_INVOKE, [0, 1, 2])]
    collect_code += [("const-string", 0, "payload"), ("invoke-static", help_m if cfg.get("indirect") else send, [0]), ("return-void",)]
    classes.append(
        ClassDef(
            reader,
            ACC_PUBLIC,
            OBJ,
            [
                Method(M(reader, "<init>", "V"), ACC_PUBLIC | ACC_CONSTRUCTOR, [("invoke-direct", OBJ_INIT, [0]), ("return-void",)], 1, 1, 1),
                Method(read, ACC_PUBLIC | ACC_STATIC, collect_code, 6, 1, 6),
            ],
        )
    )

    if cfg.get("indirect"):
        classes.append(
            ClassDef(
                helper,
                ACC_PUBLIC,
                OBJ,
                [Method(help_m, ACC_PUBLIC | ACC_STATIC, [("invoke-static", send, [1]), ("return-void",)], 2, 1, 1)],
            )
        )

    send_code = []
    for sink in cfg.get("sinks", []):
        send_code += SINKS[sink]
    send_code += [("return-void",)]
    uploader_methods = [Method(send, ACC_PUBLIC | ACC_STATIC, send_code, 4, 1, 2)]
    if cfg.get("native"):
        uploader_methods.append(Method(M(uploader, "nativeSign", STR, [STR]), ACC_PUBLIC | ACC_STATIC | ACC_NATIVE, None))
    classes.append(ClassDef(uploader, ACC_PUBLIC, OBJ, uploader_methods))

    if cfg.get("abstract"):
        sink_iface = base + "Channel;"
        classes.append(
            ClassDef(sink_iface, ACC_PUBLIC | ACC_ABSTRACT, OBJ, [Method(M(sink_iface, "push", "V", [STR]), ACC_PUBLIC | ACC_ABSTRACT, None)])
        )
    return classes


def secondary_classes(pkg, cfg):
    base = "L" + pkg.replace(".", "/") + "/extra/"
    sync = base + "SyncWorker;"
    code = []
    for sink in cfg.get("secondary_sinks", []):
        code += SINKS[sink]
    for src in cfg.get("secondary_sources", []):
        if src in SOURCES:
            code += SOURCES[src] + [("invoke-virtual/range", QUERY, [0, 1, 2, 3, 4, 5])]
    code += [("invoke-virtual", URL_OPEN, [0]), ("return-void",)]
    return [
        ClassDef(
            sync,
            ACC_PUBLIC,
            OBJ,
            [Method(M(sync, "run", "V"), ACC_PUBLIC, code, 6, 1, 6)],
        )
    ]


def manifest_tree(pkg, cfg):
    perms = [Elem("uses-permission", [a_str("name", p)]) for p in cfg.get("permissions", [])]
    perms += [Elem("uses-permission-sdk-23", [a_str("name", p)]) for p in cfg.get("permissions_sdk23", [])]
    if cfg.get("ref_permission"):
        perms.append(Elem("uses-permission", [a_ref("name", cfg["ref_permission"])]))
    sdk_attrs = []
    if "min_sdk" in cfg:
        sdk_attrs.append(a_int("minSdkVersion", cfg["min_sdk"]))
    if "target_sdk" in cfg:
        sdk_attrs.append(a_int("targetSdkVersion", cfg["target_sdk"]))
    launcher_filter = Elem(
        "intent-filter",
        [],
        [
            Elem("action", [a_str("name", "android.intent.action.MAIN")]),
            Elem("category", [a_str("name", "android.intent.category.LAUNCHER")]),
        ],
    )
    view_filter = Elem(
        "intent-filter",
        [],
        [
            Elem("action", [a_str("name", "android.intent.action.VIEW")]),
            Elem("category", [a_str("name", "android.intent.category.DEFAULT")]),
        ],
    )
    main_name = ".MainActivity" if cfg.get("relative_names") else pkg + ".MainActivity"
    activities = []
    if cfg.get("alias_launcher"):
        activities.append(Elem("activity", [a_str("name", main_name), a_bool("exported", True)], [view_filter]))
        activities.append(
            Elem(
                "activity-alias",
                [a_str("name", pkg + ".Launcher"), a_str("targetActivity", main_name), a_bool("exported", True)],
                [launcher_filter],
            )
        )
    else:
        activities.append(Elem("activity", [a_str("name", main_name), a_bool("exported", True)], [launcher_filter]))
    activities.append(Elem("activity", [a_str("name", pkg + ".SettingsActivity")], [view_filter]))
    app = Elem("application", [a_str("label", cfg.get("label", "Loan")), a_str("name", pkg + ".App")], activities)
    children = []
    if sdk_attrs:
        children.append(Elem("uses-sdk", sdk_attrs))
    children += perms + [app]
    return Elem(
        "manifest",
        [
            a_int("versionCode", cfg.get("version_code", 1)),
            a_str("versionName", cfg.get("version_name", "1.0")),
            a_str("package", pkg, android=False),
        ],
        children,
    )


P = "android.permission."

APPS = [
    ("com.fx.kopeks", dict(permissions=[P + "INTERNET", P + "READ_CONTACTS", P + "ACCESS_FINE_LOCATION"], min_sdk=21, target_sdk=33, sources=["contacts"], sinks=["urlconnection", "stream"])),
    ("com.fx.pesarahisi", dict(permissions=[P + "INTERNET", P + "READ_CALL_LOG", P + "GET_ACCOUNTS"], min_sdk=19, target_sdk=30, sources=["call_log"], sinks=["okhttp"], indirect=True, utf8=True)),
    ("com.fx.naijacash", dict(permissions=[P + "INTERNET", P + "READ_SMS", P + "READ_EXTERNAL_STORAGE", P + "WRITE_EXTERNAL_STORAGE"], permissions_sdk23=[P + "READ_CONTACTS"], min_sdk=23, target_sdk=34, sources=["sms", "media"], sinks=["retrofit"], relative_names=True)),
    ("com.fx.rupeeflow", dict(permissions=[P + "INTERNET", P + "CAMERA"], min_sdk=24, target_sdk=34, sources=[], sinks=["okhttp"], switch=True)),
    ("com.fx.pinoyloan", dict(permissions=[P + "INTERNET", P + "READ_CONTACTS", P + "GET_ACCOUNTS", P + "QUERY_ALL_PACKAGES"], min_sdk=26, target_sdk=33, sources=["contacts", "packages"], sinks=["okgo"], alias_launcher=True, multidex=True, secondary_sinks=["okhttp"], secondary_sources=["contacts"])),
    ("com.fx.dompetku", dict(permissions=[P + "INTERNET", P + "ACCESS_FINE_LOCATION", P + "ACCESS_COARSE_LOCATION"], min_sdk=21, target_sdk=31, sources=["location"], sinks=["urlconnection"], launcher_location=True, utf8=True)),
    ("com.fx.karachicredit", dict(permissions=[P + "INTERNET", P + "READ_SMS", P + "SEND_SMS", P + "READ_CONTACTS", P + "READ_MEDIA_IMAGES"], min_sdk=28, target_sdk=35, sources=["sms", "sms_send", "contacts"], sinks=["okhttp", "stream"], array=True, native=True)),
    ("com.fx.quickbob", dict(permissions=[], sources=[], sinks=[], abstract=True)),
    ("com.fx.lendhub", dict(permissions=[P + "INTERNET", P + "READ_PHONE_NUMBERS", P + "READ_PHONE_STATE"], min_sdk=22, sources=["identifiers"], sinks=["urlconnection"], reflection=True, ref_permission=0x7F0B0001)),
    ("com.fx.mkopohub", dict(permissions=[P + "INTERNET", P + "READ_CALL_LOG", P + "WRITE_CALL_LOG", P + "READ_CONTACTS", P + "READ_CONTACTS"], target_sdk=29, sources=["call_log", "contacts"], sinks=[], sink_in_reader="okhttp", multidex=True, secondary_sinks=["retrofit"])),
    ("com.fx.sikapay", dict(permissions=[P + "INTERNET", P + "MANAGE_EXTERNAL_STORAGE", P + "READ_MEDIA_VIDEO", P + "READ_MEDIA_AUDIO"], min_sdk=30, target_sdk=36, sources=["media"], sinks=["okgo"], relative_names=True, alias_launcher=True, utf8=True)),
    ("com.fx.tindahan", dict(permissions=[P + "INTERNET", "com.google.android.c2dm.permission.RECEIVE", "com.fx.tindahan.permission.C2D_MESSAGE"], min_sdk=21, target_sdk=34, sources=["packages", "identifiers"], sinks=["okhttp"], indirect=True, multidex=True, secondary_sinks=["urlconnection"], secondary_sources=["sms"])),
]


def write_apk(path, pkg, cfg):
    manifest = encode_axml(manifest_tree(pkg, cfg), utf8=cfg.get("utf8", False))
    dex1 = build_dex(app_classes(pkg, cfg))
    entries = [("AndroidManifest.xml", manifest, zipfile.ZIP_DEFLATED), ("classes.dex", dex1, zipfile.ZIP_DEFLATED)]
    if cfg.get("multidex"):
        entries.append(("classes2.dex", build_dex(secondary_classes(pkg, cfg)), zipfile.ZIP_STORED))
    entries.append(("res/raw/terms.txt", b"Terms and conditions\n" * 8, zipfile.ZIP_STORED))
    entries.append(("META-INF/MANIFEST.MF", b"Manifest-Version: 1.0\r\n", zipfile.ZIP_DEFLATED))
    with zipfile.ZipFile(path, "w") as z:
        for name, data, method in entries:
            info = zipfile.ZipInfo(name, date_time=(2025, 7, 1, 0, 0, 0))
            info.compress_type = method
            info.external_attr = 0o644 << 16
            z.writestr(info, data)
    return manifest, dex1


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for pkg, cfg in APPS:
        write_apk(out / (pkg + ".apk"), pkg, cfg)
        print(out / (pkg + ".apk"))


if __name__ == "__main__":
    main()

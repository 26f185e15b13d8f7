#!/usr/bin/env python3
"""Records androguard's view of each fixture APK as a golden JSON file.

Usage: dump_reference.py <apk_dir> <golden_dir>
"""

import json
import sys
from pathlib import Path

from loguru import logger

logger.remove()

from androguard.core.apk import APK  # noqa: E402
from androguard.core.dex import DEX  # noqa: E402

ANDROID_NS = "{http://schemas.android.com/apk/res/android}"


def attr_name(key):
    if key.startswith(ANDROID_NS):
        return "android:" + key[len(ANDROID_NS):]
    return key


def tree_dump(root):
    out = []

    def walk(e, depth):
        attrs = [[attr_name(k), v] for k, v in e.attrib.items()]
        out.append({"depth": depth, "name": e.tag, "attrs": attrs})
        for c in e:
            walk(c, depth + 1)

    walk(root, 0)
    return out


def method_id(m):
    cls, name, desc = m
    return cls + "->" + name + desc.replace(" ", "")


def dex_dump(name, raw):
    d = DEX(raw)
    invocations = []
    for m in d.get_encoded_methods():
        caller = method_id((m.get_class_name(), m.get_name(), m.get_descriptor()))
        for ins in m.get_instructions():
            op = ins.get_name()
            if op.startswith("invoke"):
                ref = d.get_cm_method(ins.get_ref_kind())
                callee = method_id((ref[0], ref[1], "".join(ref[2])))
                invocations.append([caller, callee, op.replace("/range", "")])
    return {
        "name": name,
        "strings": len(d.get_strings()),
        "types": d.get_header_item().type_ids_size,
        "methods": len(d.get_methods()),
        "classes": len(d.get_classes()),
        "invocations": invocations,
    }


def main():
    apk_dir, golden_dir = Path(sys.argv[1]), Path(sys.argv[2])
    golden_dir.mkdir(parents=True, exist_ok=True)
    for path in sorted(apk_dir.glob("*.apk")):
        a = APK(str(path))
        xml = a.get_android_manifest_xml()
        uses = [
            e.get(ANDROID_NS + "name")
            for e in xml.iter()
            if e.tag in ("uses-permission", "uses-permission-sdk-23")
        ]
        dex = []
        for name in sorted(n for n in a.get_files() if n.startswith("classes") and n.endswith(".dex")):
            dex.append(dex_dump(name, a.get_file(name)))
        golden = {
            "package": a.get_package(),
            "version_code": a.get_androidversion_code(),
            "min_sdk": a.get_min_sdk_version(),
            "target_sdk": a.get_target_sdk_version(),
            "uses_permission_values": uses,
            "activities": sorted(a.get_activities()),
            "main_activities": sorted(a.get_main_activities()),
            "tree": tree_dump(xml),
            "dex": dex,
        }
        out = golden_dir / (path.stem + ".json")
        out.write_text(json.dumps(golden, indent=1, sort_keys=True) + "\n")
        print(out)


if __name__ == "__main__":
    main()

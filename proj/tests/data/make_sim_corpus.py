#!/usr/bin/env python3
# Copyright 2026 The vulnrepro Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the simulated corpus under tests/data/corpus.

Output is deterministic; rerun after editing and commit the result.
"""

import datetime
import hashlib
import json
import pathlib
import shutil

ROOT = pathlib.Path(__file__).resolve().parent / "corpus"
DIFFS = pathlib.Path(__file__).resolve().parent / "diffs"

BASE_BUILDER = "FROM gcr.io/oss-fuzz-base/base-builder\n"


def cid(repo, label, prefix=""):
    h = hashlib.sha1(f"{repo}:{label}".encode()).hexdigest()
    return prefix + h[len(prefix):]


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def ts(text):
    return datetime.datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")


HOUR = datetime.timedelta(hours=1)


class Repo:
    def __init__(self, url, name):
        self.url = url
        self.name = name
        self.commits = []
        self.diffs = {}

    def add(self, label, when, prefix="", parents=None, diff=None):
        c = cid(self.name, label, prefix)
        if parents is None:
            parents = [self.commits[-1]["id"]] if self.commits else []
        self.commits.append({"id": c, "time": iso(when), "parents": parents})
        if diff is not None:
            self.diffs[c] = diff
        return c

    def doc(self, tip=None):
        d = {"commits": self.commits}
        if tip:
            d["tip"] = tip
        if self.diffs:
            d["diffs"] = self.diffs
        return d


def write(path, text, mode="w"):
    path.parent.mkdir(parents=True, exist_ok=True)
    if mode == "wb":
        path.write_bytes(text)
    else:
        path.write_text(text)


def one_file_diff(path, old, new, start=10):
    lines = [f"diff --git a/{path} b/{path}",
             "index 1111111..2222222 100644",
             f"--- a/{path}",
             f"+++ b/{path}",
             f"@@ -{start},{len(old)} +{start},{len(new)} @@"]
    lines += old + new
    return "\n".join(lines) + "\n"


def main():
    if ROOT.exists():
        shutil.rmtree(ROOT)
    histories = {}
    builds = []
    runs = {
        "crash-hbo": {"status": "crash", "crash_type": "heap-buffer-overflow",
                      "output": "==1==ERROR: AddressSanitizer: "
                                "heap-buffer-overflow on address 0x6020"},
        "crash-uaf": {"status": "crash", "crash_type": "heap-use-after-free",
                      "output": "==1==ERROR: AddressSanitizer: "
                                "heap-use-after-free on address 0x6030"},
        "clean": {"status": "clean"},
    }
    issues = []
    srcmaps = {}
    poc = bytes([31] + [0x41] * 31)
    poc_digest = "sha256:" + hashlib.sha256(poc).hexdigest()
    write(ROOT / "pocs" / poc_digest[7:], poc, "wb")

    def add_builds(revisions, artifact):
        builds.append({"revisions": revisions,
                       "outcome": {"status": "success", "artifact": artifact}})

    def issue(local_id, project, vul, fix, report_time, verify_time,
              crash="heap-buffer-overflow", report=None,
              labels=("Bug-Security", "Reproducible", "Verified")):
        crash_doc = {"type": crash, "sanitizer": "address",
                     "fuzzer": f"{project}_fuzzer",
                     "command": ["$OUT/fuzzer", "{testcase}"]}
        if report:
            crash_doc["report"] = report
        issues.append({
            "local_id": local_id, "project": project, "labels": list(labels),
            "crash": crash_doc,
            "vulnerable": {"srcmap": f"srcmaps/{local_id}-vul.json",
                           "rev": vul[0]["rev"]},
            "verified": {"srcmap": f"srcmaps/{local_id}-fix.json",
                         "rev": fix[0]["rev"]},
            "report_time": iso(report_time), "verify_time": iso(verify_time),
            "poc": {"digest": poc_digest, "bytes": len(poc)}})
        for side, entries in (("vul", vul), ("fix", fix)):
            srcmaps[f"{local_id}-{side}"] = {
                e["path"]: {"type": "git", "url": e["url"], "rev": e["rev"]}
                for e in entries}

    def pin(name, url, rev):
        return {"path": f"/src/{name}", "url": url, "rev": rev}

    def project(name, url, deps=(), extra_run=""):
        docker = BASE_BUILDER
        if extra_run:
            docker += extra_run
        docker += f"RUN git clone {url} {name}\n"
        for dep, dep_url in deps:
            docker += f"RUN git clone {dep_url} {dep}\n"
        docker += f"WORKDIR {name}\nCOPY build.sh $SRC/\n"
        write(ROOT / "projects" / name / "Dockerfile", docker)
        write(ROOT / "projects" / name / "build.sh",
              "#!/bin/bash -eu\n./configure --disable-shared\n"
              "make -j$(nproc)\ncp fuzzer $OUT/\n")

    # imagemagick: 14 hourly candidates, the fix at index 9, the verified
    # revision a ChangeLog edit.
    im_url = "https://github.com/imagemagick/imagemagick"
    z_url = "https://github.com/madler/zlib"
    im = Repo(im_url, "imagemagick")
    zl = Repo(z_url, "zlib")
    z0 = zl.add("z0", ts("2022-02-01T00:00:00Z"))
    zl.add("z1", ts("2022-02-10T15:00:00Z"))
    z2 = zl.add("z2", ts("2022-02-11T00:30:00Z"))
    t0 = ts("2022-02-10T00:00:00Z")
    im.add("old", t0 - 240 * HOUR)
    vul = im.add("vul", t0, prefix="6f6caf")
    im_fix_diff = one_file_diff(
        "coders/sixel.c", ["-  if (n > size) n = size;"],
        ["+  if (n > 8)", "+    n = 8;"])
    cands = []
    for i in range(14):
        when = t0 + (12 + i) * HOUR
        if i == 9:
            cands.append(im.add("fix", when, diff=im_fix_diff))
        elif i == 13:
            cands.append(im.add("changelog", when, prefix="aa668b",
                                diff=one_file_diff("ChangeLog", [],
                                                   ["+  * release notes"])))
        else:
            cands.append(im.add(f"c{i}", when))
    im_tip = im.add("later", t0 + 72 * HOUR)
    add_builds([vul] + cands[:9], "crash-hbo")
    add_builds(cands[9:] + [im_tip], "clean")
    project("imagemagick", im_url, [("zlib", z_url)])
    issue(44851, "imagemagick",
          [pin("imagemagick", im_url, vul), pin("zlib", z_url, z0)],
          [pin("imagemagick", im_url, cands[13]), pin("zlib", z_url, z2)],
          t0 + 6 * HOUR, t0 + 25 * HOUR)
    # Reported later inside the same window; the same fix.
    issue(44852, "imagemagick",
          [pin("imagemagick", im_url, cands[3]), pin("zlib", z_url, z0)],
          [pin("imagemagick", im_url, cands[13]), pin("zlib", z_url, z2)],
          t0 + 16 * HOUR, t0 + 25 * HOUR)
    histories[im_url] = im.doc()
    histories[z_url] = zl.doc()

    # heifcodec: the verified revision edits README and still crashes; the
    # real fix lands months later.
    hf_url = "https://github.com/strukturag/libheif"
    hf = Repo(hf_url, "heifcodec")
    h_vul = hf.add("vul", ts("2021-01-01T00:00:00Z"))
    h_readme = hf.add("readme", ts("2021-01-05T00:00:00Z"),
                      diff=one_file_diff("README.md", ["-Build it."],
                                         ["+Build it with cmake."]))
    fillers = []
    for m in range(2, 19):
        y, mo = (2021, m) if m <= 12 else (2022, m - 12)
        fillers.append(hf.add(f"f{m}", datetime.datetime(y, mo, 1)))
    memcpy_diff = one_file_diff(
        "libheif/heif_decoder.cc",
        ["-  memcpy(dst, src, size + 4);"], ["+  memcpy(dst, src, size);"])
    h_fix = hf.add("memcpy", ts("2022-07-15T00:00:00Z"), diff=memcpy_diff)
    late = [hf.add(f"l{m}", datetime.datetime(2022, m, 1)) for m in (8, 9, 10)]
    add_builds([h_vul, h_readme] + fillers, "crash-hbo")
    add_builds([h_fix] + late, "clean")
    project("heifcodec", hf_url)
    heif_report = ("==1==ERROR: AddressSanitizer: heap-buffer-overflow\n"
                   "    #0 in __asan_memcpy\n"
                   "    #1 in heif::decode_tile heif_decoder.cc:212\n")
    issue(25267, "heifcodec", [pin("heifcodec", hf_url, h_vul)],
          [pin("heifcodec", hf_url, h_readme)],
          ts("2021-01-02T00:00:00Z"), ts("2021-01-05T00:00:00Z"),
          report=heif_report)
    issue(39373, "heifcodec", [pin("heifcodec", hf_url, fillers[13])],
          [pin("heifcodec", hf_url, late[0])],
          ts("2022-03-15T00:00:00Z"), ts("2022-08-01T00:00:00Z"),
          report=heif_report)
    histories[hf_url] = hf.doc()

    # wireshark: the located fix is a one-line change; a large later commit
    # in another dissector is what an external source names.
    ws_url = "https://gitlab.com/wireshark/wireshark"
    ws = Repo(ws_url, "wireshark")
    w_vul = ws.add("vul", ts("2021-06-01T00:00:00Z"))
    w_mid = ws.add("mid", ts("2021-06-03T00:00:00Z"))
    rtps = (DIFFS / "wireshark-rtps.diff").read_text()
    nas = (DIFFS / "wireshark-nas5gs.diff").read_text()
    w_fix = ws.add("rtps", ts("2021-06-04T00:00:00Z"), prefix="29f2177",
                   diff=rtps)
    w_big = ws.add("nas", ts("2021-06-05T00:00:00Z"), prefix="561c560",
                   diff=nas)
    add_builds([w_vul, w_mid], "crash-uaf")
    add_builds([w_fix, w_big], "clean")
    project("wireshark", ws_url)
    issue(7, "wireshark", [pin("wireshark", ws_url, w_vul)],
          [pin("wireshark", ws_url, w_big)],
          ts("2021-06-02T00:00:00Z"), ts("2021-06-05T00:00:00Z"),
          crash="heap-use-after-free",
          report="==1==ERROR: AddressSanitizer: heap-use-after-free\n"
                 "    #1 in dissect_rtps packet-rtps.c:5122\n")
    histories[ws_url] = ws.doc()

    # mergeproj: fix on a branch merged afterwards; an external source
    # names the merge.
    mp_url = "https://github.com/example/mergeproj"
    mp = Repo(mp_url, "mergeproj")
    m_base = mp.add("base", ts("2021-03-01T00:00:00Z"))
    m_side = mp.add("side", ts("2021-03-02T00:00:00Z"), parents=[m_base])
    m_fix = mp.add("fix", ts("2021-03-03T00:00:00Z"), parents=[m_base],
                   diff=one_file_diff("src/parse.c", ["-  len += 1;"],
                                      ["+  len -= 1;"]))
    m_merge = mp.add("merge", ts("2021-03-04T00:00:00Z"),
                     parents=[m_fix, m_side])
    add_builds([m_base, m_side], "crash-hbo")
    add_builds([m_fix, m_merge], "clean")
    project("mergeproj", mp_url)
    issue(8, "mergeproj", [pin("mergeproj", mp_url, m_base)],
          [pin("mergeproj", mp_url, m_merge)],
          ts("2021-03-01T12:00:00Z"), ts("2021-03-04T00:00:00Z"))
    histories[mp_url] = mp.doc()

    # mergefix: the first clean commit is itself a merge.
    mf_url = "https://github.com/example/mergefix"
    mf = Repo(mf_url, "mergefix")
    f_base = mf.add("base", ts("2021-04-01T00:00:00Z"))
    f_side = mf.add("side", ts("2021-04-02T00:00:00Z"), parents=[f_base])
    f_merge = mf.add("merge", ts("2021-04-03T00:00:00Z"),
                     parents=[f_base, f_side],
                     diff=one_file_diff("src/io.c", ["-  free(p);"],
                                        ["+  p = NULL;"]))
    add_builds([f_base, f_side], "crash-hbo")
    add_builds([f_merge], "clean")
    project("mergefix", mf_url)
    issue(11, "mergefix", [pin("mergefix", mf_url, f_base)],
          [pin("mergefix", mf_url, f_merge)],
          ts("2021-04-01T12:00:00Z"), ts("2021-04-03T00:00:00Z"))
    histories[mf_url] = mf.doc()

    # pcreuser: a dependency hosted on a retired server.
    pu_url = "https://github.com/example/pcreuser"
    dead = "https://ftp.dead.example.org/pcre.git"
    mirror = "https://github.com/PCRE2Project/pcre2"
    pu = Repo(pu_url, "pcreuser")
    p_vul = pu.add("vul", ts("2021-05-01T00:00:00Z"))
    p_fix = pu.add("fix", ts("2021-05-02T00:00:00Z"),
                   diff=one_file_diff("match.c", ["-  i <= n;"], ["+  i < n;"]))
    builds.append({"revision": p_vul, "rules": ["pcre-git-mirror"],
                   "outcome": {"status": "success", "artifact": "crash-hbo"}})
    builds.append({"revision": p_fix, "rules": ["pcre-git-mirror"],
                   "outcome": {"status": "success", "artifact": "clean"}})
    project("pcreuser", pu_url, [("pcre", dead)])
    pcre_rev = cid("pcre", "r1")
    issue(9, "pcreuser",
          [pin("pcreuser", pu_url, p_vul), pin("pcre", dead, pcre_rev)],
          [pin("pcreuser", pu_url, p_fix), pin("pcre", dead, pcre_rev)],
          ts("2021-05-01T06:00:00Z"), ts("2021-05-02T00:00:00Z"))
    histories[pu_url] = pu.doc()

    # tiffcodec: every candidate but the verified one fails to build.
    tf_url = "https://gitlab.com/libtiff/libtiff"
    tf = Repo(tf_url, "tiffcodec")
    t_vul = tf.add("vul", ts("2021-08-01T00:00:00Z"))
    broken = [tf.add(f"b{i}", ts("2021-08-02T00:00:00Z") + i * HOUR)
              for i in range(13)]
    t_fix = tf.add("fix", ts("2021-08-03T00:00:00Z"))
    add_builds([t_vul], "crash-hbo")
    add_builds([t_fix], "clean")
    builds.append({"revisions": broken,
                   "outcome": {"status": "compile_error",
                               "log": "tif_dir.c:41: error: unknown type "
                                      "name 'toff_t'"}})
    project("tiffcodec", tf_url)
    issue(10, "tiffcodec", [pin("tiffcodec", tf_url, t_vul)],
          [pin("tiffcodec", tf_url, t_fix)],
          ts("2021-08-01T06:00:00Z"), ts("2021-08-03T00:00:00Z"))
    histories[tf_url] = tf.doc()

    # Not reproducible upstream: never a candidate.
    issue(12, "wireshark", [pin("wireshark", ws_url, w_vul)],
          [pin("wireshark", ws_url, w_fix)],
          ts("2021-06-02T00:00:00Z"), ts("2021-06-04T00:00:00Z"),
          labels=("Bug-Security", "Verified"))

    for doc in issues:
        write(ROOT / "issues" / f"{doc['local_id']}.json",
              json.dumps(doc, indent=2) + "\n")
    for name, doc in srcmaps.items():
        write(ROOT / "srcmaps" / f"{name}.json", json.dumps(doc, indent=2) + "\n")
    manifest = {"dead_urls": [dead], "builds": builds, "runs": runs,
                "prebuilt": {"25267-fix": "crash-hbo"}}
    write(ROOT / "sim_manifest.json", json.dumps(manifest, indent=2) + "\n")
    write(ROOT / "histories.json",
          json.dumps({"repos": histories}, indent=2) + "\n")
    write(ROOT / "rules.txt",
          "# rules-format: 1\n"
          f"pcre-git-mirror | core | {dead}* | replace {mirror} "
          "| # upstream host retired\n"
          "sourceforge-gone | non_core | https://downloads.sourceforge.net/* "
          "| remove | # optional test data\n")
    write(ROOT.parent / "external_fixes.json", json.dumps({
        "44851": cands[9][:12], "7": w_big, "8": m_merge}, indent=2) + "\n")


if __name__ == "__main__":
    main()

"""PAGE XML and JSON sidecar serialization of text-line polygons.

Files store vertices as ``x,y`` (column, row). Inside the package every point
is ``(row, col)``; the swap happens here and nowhere else.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

NS_2013 = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15"
KNOWN_NAMESPACES = (
    NS_2013,
    "http://schema.primaresearch.org/PAGE/gts/pagecontent/2017-07-15",
    "http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15",
)
# fixed timestamp keeps output byte-identical across runs
_STAMP = "1970-01-01T00:00:00"


class PageXMLError(ValueError):
    pass


@dataclass
class TextLine:
    id: str
    points: list  # [(x, y), ...] integer pixel coordinates


@dataclass
class PageDocument:
    image_filename: str
    width: int
    height: int
    lines: list = field(default_factory=list)

    @classmethod
    def from_polygons(cls, image_filename, shape, polygons, prefix="line") -> "PageDocument":
        """Build a document from (row, col) vertex lists."""
        height, width = shape
        lines = []
        for i, poly in enumerate(polygons):
            verts = getattr(poly, "vertices", poly)
            pts = [(min(max(int(round(c)), 0), width - 1), min(max(int(round(r)), 0), height - 1)) for r, c in verts]
            lines.append(TextLine(f"{prefix}_{i + 1:04d}", pts))
        return cls(image_filename, width, height, lines)

    def polygons(self) -> list:
        """Line polygons as (row, col) vertex lists."""
        return [[(y, x) for x, y in line.points] for line in self.lines]


def _points_str(points) -> str:
    return " ".join(f"{x},{y}" for x, y in points)


def write_page_xml(doc: PageDocument, target=None) -> bytes:
    """Serialize ``doc``; also writes to ``target`` (path or file) if given."""
    ET.register_namespace("", NS_2013)
    q = lambda tag: f"{{{NS_2013}}}{tag}"  # noqa: E731
    root = ET.Element(q("PcGts"), {"pcGtsId": "pc-" + Path(doc.image_filename).stem})
    meta = ET.SubElement(root, q("Metadata"))
    ET.SubElement(meta, q("Creator")).text = "scriptorium"
    ET.SubElement(meta, q("Created")).text = _STAMP
    ET.SubElement(meta, q("LastChange")).text = _STAMP
    page = ET.SubElement(root, q("Page"), {
        "imageFilename": doc.image_filename,
        "imageWidth": str(doc.width),
        "imageHeight": str(doc.height),
    })
    region = ET.SubElement(page, q("TextRegion"), {"id": "region_0001", "type": "paragraph"})
    w, h = doc.width - 1, doc.height - 1
    ET.SubElement(region, q("Coords"), {"points": f"0,0 {w},0 {w},{h} 0,{h}"})
    for line in doc.lines:
        el = ET.SubElement(region, q("TextLine"), {"id": line.id})
        ET.SubElement(el, q("Coords"), {"points": _points_str(line.points)})
    ET.indent(root, space="  ")
    data = ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"
    if target is not None:
        if hasattr(target, "write"):
            target.write(data)
        else:
            Path(target).write_bytes(data)
    return data


def _parse_points(text: str) -> list:
    pts = []
    for pair in text.split():
        x, _, y = pair.partition(",")
        pts.append((int(round(float(x))), int(round(float(y)))))
    return pts


def parse_page_xml(data) -> PageDocument:
    """Read text lines from PAGE XML (bytes, str path or Path).

    Any PAGE namespace version is accepted; elements other than Page,
    TextLine and their Coords are ignored.
    """
    if isinstance(data, (str, Path)) and not str(data).lstrip().startswith("<"):
        data = Path(data).read_bytes()
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise PageXMLError(f"malformed PAGE XML: {exc}") from exc
    ns = root.tag[1:].split("}")[0] if root.tag.startswith("{") else ""
    q = (lambda tag: f"{{{ns}}}{tag}") if ns else (lambda tag: tag)
    page = root.find(q("Page"))
    if page is None:
        raise PageXMLError("no Page element")
    doc = PageDocument(page.get("imageFilename", ""), int(page.get("imageWidth", 0)), int(page.get("imageHeight", 0)))
    for line in page.iter(q("TextLine")):
        lid = line.get("id", "")
        coords = line.find(q("Coords"))
        if coords is None:
            raise PageXMLError(f"TextLine {lid!r} has no Coords")
        if coords.get("points") is not None:
            pts = _parse_points(coords.get("points"))
        else:  # 2010-style Point children
            pts = [(int(p.get("x")), int(p.get("y"))) for p in coords.findall(q("Point"))]
            if not pts:
                raise PageXMLError(f"TextLine {lid!r} has empty Coords")
        doc.lines.append(TextLine(lid, pts))
    return doc


def write_json(doc: PageDocument, target=None) -> bytes:
    """JSON sidecar: ``{"image", "width", "height", "lines": [{"id", "points": [[x, y], ...]}]}``."""
    obj = {
        "image": doc.image_filename,
        "width": doc.width,
        "height": doc.height,
        "lines": [{"id": l.id, "points": [list(p) for p in l.points]} for l in doc.lines],
    }
    data = (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode()
    if target is not None:
        Path(target).write_bytes(data)
    return data


def read_json(data) -> PageDocument:
    if isinstance(data, (str, Path)) and not str(data).lstrip().startswith("{"):
        data = Path(data).read_bytes()
    obj = json.loads(data)
    lines = [TextLine(l["id"], [tuple(p) for p in l["points"]]) for l in obj["lines"]]
    return PageDocument(obj["image"], obj["width"], obj["height"], lines)


def read_document(path) -> PageDocument:
    path = Path(path)
    return read_json(path) if path.suffix.lower() == ".json" else parse_page_xml(path)

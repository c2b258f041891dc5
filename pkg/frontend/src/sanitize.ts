/** Allowlist sanitizer for report documents fetched from the API.
 *
 * The report is embedded into the console page, so everything outside a
 * known-good set of tags and attributes is stripped: scripts and styles go
 * away with their content, event handlers and active URLs never survive,
 * while ids and fragment links are kept so citation anchors stay navigable.
 */

const KEPT_TAGS = new Set([
  "a", "article", "br", "caption", "div", "em", "footer",
  "h1", "h2", "h3", "h4", "header", "hr", "li", "main", "ol", "p",
  "section", "span", "strong", "sup", "table", "tbody", "td", "th",
  "thead", "tr", "ul",
]);

/** Removed together with everything inside them. */
const DROPPED_WITH_CONTENT = new Set([
  "script", "style", "iframe", "object", "embed", "noscript", "template",
]);

const KEPT_ATTRIBUTES = new Set([
  "id", "class", "lang", "data-state", "colspan", "rowspan", "scope",
]);

/** Inline styles survive only when they look like plain declarations. */
const SAFE_STYLE = /^[a-zA-Z0-9#%.,:;()\s-]*$/;

const TAG = /<!--[\s\S]*?-->|<\/?([a-zA-Z][a-zA-Z0-9-]*)((?:[^>"']|"[^"]*"|'[^']*')*)>/g;

const ATTRIBUTE = /([a-zA-Z][a-zA-Z0-9-]*)(?:\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s/>]+)))?/g;

/** The report arrives as a full document; embed only what its body shows. */
export function extractBody(html: string): string {
  const match = /<body[^>]*>([\s\S]*?)<\/body>/i.exec(html);
  return match ? match[1] : html;
}

export function sanitizeReportHtml(html: string): string {
  const body = extractBody(html);
  const parts: string[] = [];
  let cursor = 0;

  TAG.lastIndex = 0;
  let match: RegExpExecArray | null;
  while ((match = TAG.exec(body)) !== null) {
    parts.push(body.slice(cursor, match.index));
    cursor = TAG.lastIndex;
    if (match[1] === undefined) {
      continue; // a comment: dropped
    }
    const name = match[1].toLowerCase();
    const isClosing = match[0].startsWith("</");

    if (DROPPED_WITH_CONTENT.has(name)) {
      if (!isClosing) {
        const close = new RegExp(`</${name}\\s*>`, "gi");
        close.lastIndex = cursor;
        const end = close.exec(body);
        cursor = end ? close.lastIndex : body.length;
        TAG.lastIndex = cursor;
      }
      continue;
    }
    if (!KEPT_TAGS.has(name)) {
      continue; // unknown tag dropped, its content kept
    }
    if (isClosing) {
      parts.push(`</${name}>`);
    } else {
      parts.push(`<${name}${sanitizeAttributes(name, match[2])}>`);
    }
  }
  parts.push(body.slice(cursor));
  return parts.join("");
}

function sanitizeAttributes(tag: string, raw: string): string {
  const kept: string[] = [];
  ATTRIBUTE.lastIndex = 0;
  let match: RegExpExecArray | null;
  while ((match = ATTRIBUTE.exec(raw)) !== null) {
    const name = match[1].toLowerCase();
    const value = match[2] ?? match[3] ?? match[4] ?? "";
    if (keepAttribute(tag, name, value)) {
      kept.push(`${name}="${value.replace(/"/g, "&quot;")}"`);
    }
  }
  return kept.length ? " " + kept.join(" ") : "";
}

function keepAttribute(tag: string, name: string, value: string): boolean {
  if (KEPT_ATTRIBUTES.has(name)) {
    return true;
  }
  if (name === "href" && tag === "a") {
    return isSafeLink(value);
  }
  if (name === "style") {
    return SAFE_STYLE.test(value) && !/url\s*\(|expression/i.test(value);
  }
  return false;
}

function isSafeLink(value: string): boolean {
  const link = value.trim().toLowerCase();
  return (
    link.startsWith("#") ||
    link.startsWith("https://") ||
    link.startsWith("http://")
  );
}

/** The single data-state marker the report's financial section declares. */
export function extractEpistemicState(
  html: string,
): "registry-verified" | "third-party" | "not-found" | null {
  const match = /data-state="(registry-verified|third-party|not-found)"/.exec(
    html,
  );
  return match ? (match[1] as "registry-verified" | "third-party" | "not-found") : null;
}

import init, { cleanText, tfidfTerms, fitTopics } from "./pkg/stagewise_demo.js";

const $ = (id) => document.getElementById(id);

const SAMPLE = [
  ["travel", "ban", "border", "close", "flight", "china"],
  ["wet", "market", "bat", "soup", "eat", "wuhan"],
  ["lab", "leak", "cover", "lie", "government", "ccp"],
  ["mask", "hospital", "doctor", "case", "confirm", "death"],
];

function sampleCorpus() {
  let state = 7;
  const next = (n) => {
    state = (state * 1103515245 + 12345) % 2147483648;
    return state % n;
  };
  const lines = [];
  for (let i = 0; i < 160; i++) {
    const words = SAMPLE[i % SAMPLE.length];
    const doc = [];
    for (let j = 0; j < 10; j++) doc.push(words[next(words.length)]);
    lines.push(doc.join(" "));
  }
  return lines.join("\n");
}

function table(headers, rows) {
  const head = "<tr>" + headers.map((h) => `<th>${h}</th>`).join("") + "</tr>";
  const body = rows.map((r) => "<tr>" + r.map((c) => `<td>${c}</td>`).join("") + "</tr>").join("");
  return `<table>${head}${body}</table>`;
}

function guard(out, f) {
  try {
    out.innerHTML = f();
  } catch (e) {
    out.innerHTML = `<p class="error">${e.message ?? e}</p>`;
  }
}

function runClean() {
  guard($("clean-out"), () => {
    const r = JSON.parse(cleanText($("tweet").value));
    return table(["path", "output"], [
      ["classification", r.classification],
      ["topics", r.topic_tokens.join(" ")],
    ]);
  });
}

function runTfidf() {
  guard($("tfidf-out"), () => {
    const r = JSON.parse(tfidfTerms($("corpus").value, $("query").value, Number($("min-df").value)));
    const rows = r.terms.map((t) => [t.term, t.df, t.idf.toFixed(4), t.weight.toFixed(4)]);
    return `<p>${r.documents} documents, ${r.vocabulary} terms</p>` + table(["term", "df", "idf", "weight"], rows);
  });
}

function runTopics() {
  guard($("topics-out"), () => {
    const r = JSON.parse(
      fitTopics($("corpus").value, Number($("k").value), Number($("target").value),
        Number($("iters").value), Number($("seed").value)),
    );
    const rows = r.clusters.map((c, i) => [
      i + 1,
      c.members.join(", "),
      c.words.map(([w, p]) => `${w} (${p.toFixed(3)})`).join(", "),
    ]);
    return `<p>${r.documents} documents, ${r.vocabulary} words, K = ${r.k}, mean coherence ${r.coherence.toFixed(3)}</p>` +
      table(["cluster", "topics", "top words"], rows);
  });
}

await init();
$("corpus").value = sampleCorpus();
$("sample").onclick = () => ($("corpus").value = sampleCorpus());
$("clean-run").onclick = runClean;
$("tfidf-run").onclick = runTfidf;
$("topics-run").onclick = runTopics;
runClean();

export type Route =
  | { name: "queue"; annotator: string }
  | { name: "adjudication" }
  | { name: "dashboard" };

/** Hash routes: #/queue/<annotator>, #/adjudication, #/dashboard. */
export function parseRoute(hash: string): Route | null {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "queue" && parts[1]) {
    return { name: "queue", annotator: decodeURIComponent(parts[1]) };
  }
  if (parts[0] === "adjudication" && parts.length === 1) {
    return { name: "adjudication" };
  }
  if (parts[0] === "dashboard" && parts.length === 1) {
    return { name: "dashboard" };
  }
  return null;
}

export function routeHash(route: Route): string {
  switch (route.name) {
    case "queue":
      return `#/queue/${encodeURIComponent(route.annotator)}`;
    case "adjudication":
      return "#/adjudication";
    case "dashboard":
      return "#/dashboard";
  }
}

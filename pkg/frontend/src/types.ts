/** Document shapes exchanged with the studio API. */

export interface AssetRefDoc {
  path: string;
  mime: string;
}

export type ItemDoc =
  | { type: "text"; body: string }
  | { type: "image" | "audio" | "video" | "animation"; path: string; mime: string; caption: string }
  | { type: "map_point"; lat: number; lon: number; label: string }
  | { type: "phone"; digits: string }
  | { type: "email"; address: string }
  | { type: "web_link"; url: string; label: string };

export interface PageDoc {
  id: number;
  title: string;
  contents: ItemDoc[];
  children: PageDoc[];
}

export interface ThemeDoc {
  fg_color: string;
  bg_color: string;
  highlight_color: string;
  background_image: AssetRefDoc | null;
  background_music: AssetRefDoc | null;
}

export interface ProjectDoc {
  app_id: string;
  version: number;
  title: string;
  languages: string[];
  category: string;
  theme: ThemeDoc;
  pages: PageDoc[];
}

export interface ProjectResponse {
  revision: number;
  project: ProjectDoc;
  preview_digest: string | null;
}

export interface ValidationIssue {
  code: string;
  page_id: number | null;
  detail: string;
}

export interface GlyphBox {
  codepoint: number;
  form: string;
  x: number;
  width: number;
  height: number;
  bearing: number;
}

export interface ShapedLineDoc {
  glyphs: GlyphBox[];
  total_advance: number;
}

export interface RenderItemDoc {
  type: string;
  body?: string;
  lines?: ShapedLineDoc[] | null;
  digest?: string;
  mime?: string;
  caption?: string;
  lat?: number;
  lon?: number;
  label?: string;
  digits?: string;
  address?: string;
  url?: string;
}

export interface RenderPageDoc {
  id: number;
  parent_id: number | null;
  title: string;
  title_line: ShapedLineDoc | null;
  direction: "ltr" | "rtl";
  items: RenderItemDoc[];
}

export interface RenderThemeDoc {
  fg_color: string;
  bg_color: string;
  highlight_color: string;
  background_image: { digest: string; mime: string } | null;
  background_music: { digest: string; mime: string } | null;
}

export interface RenderTreeDoc {
  line_height: number | null;
  theme: RenderThemeDoc;
  pages: RenderPageDoc[];
}

export interface PreviewResponse {
  digest: string;
  render_tree: RenderTreeDoc;
}

export interface ReleaseDoc {
  app_id: string;
  version: number;
  category: string;
  digest: string;
  size: number;
  published_seq: number;
}

export interface FleetNodeDoc {
  url: string;
  ok: boolean;
  role?: string;
  seq?: number;
  held_count?: number;
}

export interface TimelineRowDoc {
  hour: number;
  attempts: number;
  successes: number;
  failures: number;
  rejections: number;
}

export interface SimStatsDoc {
  seed: number;
  attempts: number;
  successes: number;
  failures: number;
  rejections: number;
  unique_devices_seen: number;
  mean_concurrent_in_range: number;
  timeline: TimelineRowDoc[] | null;
}

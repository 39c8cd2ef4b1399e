/** Two-locale string table; switching to Farsi flips the whole layout
 * direction to right-to-left. */

import type { Locale } from "./store.js";

const STRINGS = {
  en: {
    pages: "Pages",
    addPage: "Add page",
    addChild: "Add child",
    rename: "Rename",
    delete: "Delete",
    moveUp: "Move up",
    moveDown: "Move down",
    contents: "Contents",
    theme: "Theme",
    preview: "Preview",
    refreshPreview: "Compile preview",
    publish: "Publish",
    centralUrl: "Central URL",
    fleet: "Fleet",
    broadcast: "Broadcast stats",
    attempts: "attempts",
    successes: "sent",
    failures: "failed",
    rejections: "rejected",
    offline: "offline",
    back: "Back",
    rootMenu: "Root menu",
    addText: "Add text",
    addLink: "Add link",
    addPhone: "Add phone",
    applyBody: "Apply text",
    foreground: "Foreground",
    background: "Background",
    highlight: "Highlight",
    title: "Title",
    noPreview: "No preview yet. Compile one.",
    errors: "Problems",
  },
  fa: {
    pages: "صفحه‌ها",
    addPage: "افزودن صفحه",
    addChild: "افزودن زیرصفحه",
    rename: "تغییر نام",
    delete: "حذف",
    moveUp: "بالا",
    moveDown: "پایین",
    contents: "محتوا",
    theme: "قالب",
    preview: "پیش‌نمایش",
    refreshPreview: "ساخت پیش‌نمایش",
    publish: "انتشار",
    centralUrl: "نشانی سرور مرکزی",
    fleet: "ایستگاه‌ها",
    broadcast: "آمار ارسال",
    attempts: "تلاش‌ها",
    successes: "موفق",
    failures: "ناموفق",
    rejections: "رد شده",
    offline: "آفلاین",
    back: "بازگشت",
    rootMenu: "فهرست اصلی",
    addText: "افزودن متن",
    addLink: "افزودن پیوند",
    addPhone: "افزودن تلفن",
    applyBody: "ثبت متن",
    foreground: "رنگ متن",
    background: "رنگ زمینه",
    highlight: "رنگ تاکید",
    title: "عنوان",
    noPreview: "پیش‌نمایشی نیست.",
    errors: "خطاها",
  },
} as const;

export type StringKey = keyof typeof STRINGS.en;

export function t(locale: Locale, key: StringKey): string {
  return STRINGS[locale][key];
}

export function dirFor(locale: Locale): "ltr" | "rtl" {
  return locale === "fa" ? "rtl" : "ltr";
}

/** Wire types for the /api/v1 service. */

export interface KnowledgeTypeDto {
  id: string;
  name: string;
  colorKey: string;
  builtin: boolean;
}

export interface LinkTypeDto {
  id: string;
  name: string;
  builtin: boolean;
}

export interface AnnotationDto {
  kind: "Note" | "DocumentLink";
  text: string | null;
  uri: string | null;
  createdAt: string;
}

export interface KnowledgeObjectDto {
  id: string;
  typeId: string;
  displayName: string;
  qualifiedName: string;
  access: "public" | "private" | "other";
  kindTag: string | null;
  annotations: AnnotationDto[];
}

export interface LinkDto {
  id: string;
  linkTypeId: string;
  parentId: string;
  childId: string;
}

export interface ChildRowDto {
  linkTypeName: string;
  object: KnowledgeObjectDto;
}

export interface VisibilityDto {
  revision: number;
  visible: Record<string, string[]>;
}

export interface ChangeEventDto {
  revision: number;
  kind:
    | "TypeAdded"
    | "ObjectAdded"
    | "ObjectRemoved"
    | "LinkAdded"
    | "LinkRemoved"
    | "AnnotationChanged";
  payload: Record<string, unknown>;
}

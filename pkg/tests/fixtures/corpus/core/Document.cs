using System.Collections;

namespace VectorCad.Core
{
    /// <summary>
    /// Shape storage half of the document; the change-event half lives
    /// in DocumentEvents.cs. Add and remove both raise Changed so the
    /// canvas repaints without polling.
    /// </summary>
    public partial class Document
    {
        private ArrayList m_shapes;
        private string m_title;

        public Document(string title)
        {
            m_title = title;
            m_shapes = new ArrayList();
        }

        public string Title
        {
            get { return m_title; }
        }

        public void AddShape(Shape shape)
        {
            m_shapes.Add(shape);
            RaiseChanged(shape);
        }

        public void RemoveShape(Shape shape)
        {
            m_shapes.Remove(shape);
            RaiseChanged(shape);
        }
    }
}
